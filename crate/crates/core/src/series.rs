//! Univariate truncated Taylor series of dynamic order.
//!
//! Complements [`crate::jet`]: jets stop at order 3, while the
//! desingularization change of coordinates needs a few more derivatives of
//! one-variable profile functions (and functional inversion, which jets do
//! not offer).

/// Taylor coefficients `c[k] = f^{(k)}(x0)/k!` truncated at `c.len() - 1`.
#[derive(Clone, Debug)]
pub struct Series1 {
    pub c: Vec<f64>,
}

impl Series1 {
    pub fn constant(v: f64, order: usize) -> Series1 {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Series1 { c }
    }

    /// The identity seeded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Series1 {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Series1 { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn add(&self, o: &Series1) -> Series1 {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Series1) -> Series1 {
        self.zip(o, |a, b| a - b)
    }

    fn zip(&self, o: &Series1, f: impl Fn(f64, f64) -> f64) -> Series1 {
        let n = self.c.len().min(o.c.len());
        Series1 { c: (0..n).map(|k| f(self.c[k], o.c[k])).collect() }
    }

    pub fn scale(&self, s: f64) -> Series1 {
        Series1 { c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn mul(&self, o: &Series1) -> Series1 {
        let n = self.c.len().min(o.c.len());
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Series1 { c }
    }

    pub fn powi(&self, p: usize) -> Series1 {
        let mut acc = Series1::constant(1.0, self.order());
        for _ in 0..p {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn recip(&self) -> Series1 {
        let a = self.c[0];
        assert!(a != 0.0, "series reciprocal at zero");
        // Newton-free recurrence: (1/f)_k from the convolution identity.
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0 / a;
        for k in 1..=n {
            let mut s = 0.0;
            for j in 0..k {
                s += c[j] * self.c[k - j];
            }
            c[k] = -s / a;
        }
        Series1 { c }
    }

    pub fn div(&self, o: &Series1) -> Series1 {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Series1 {
        // e_k = (1/k) sum_{j=1..k} j a_j e_{k-j}, e_0 = exp(a_0).
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = self.c[0].exp();
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = s / k as f64;
        }
        Series1 { c }
    }

    /// Compose `self` (outer) with `inner`, requiring `inner.c[0] == 0` after
    /// re-centering is the caller's job; here `inner` must have zero constant
    /// term.
    pub fn compose(&self, inner: &Series1) -> Series1 {
        assert!(inner.c[0] == 0.0, "composition needs zero constant term");
        let n = self.order().min(inner.order());
        let mut acc = Series1::constant(self.c[n], n);
        for k in (0..n).rev() {
            acc = acc.mul(inner);
            acc.c[0] += self.c[k];
        }
        acc
    }

    /// Functional inverse: for `y(x) = y0 + a1 dx + ...` with `a1 != 0`,
    /// returns the series of `x(y) - x0` in powers of `(y - y0)`.
    pub fn invert(&self) -> Series1 {
        let n = self.order();
        assert!(self.c[1] != 0.0, "series inversion needs nonzero slope");
        let mut g = Series1::constant(0.0, n);
        g.c[1] = 1.0 / self.c[1];
        // Newton-style fixed point: g <- g - (f(g) - y) / f'(g), all as series
        // in (y - y0). Quadratic convergence; a few sweeps reach full order.
        let mut f_shift = self.clone();
        f_shift.c[0] = 0.0; // f(x0 + dx) - y0
        let mut fp = Series1 { c: (1..=n).map(|k| self.c[k] * k as f64).collect() };
        fp.c.resize(n + 1, 0.0);
        let y = Series1::variable(0.0, n); // (y - y0) itself
        for _ in 0..n + 2 {
            let fg = f_shift.compose(&g);
            let fpg = fp.compose(&g);
            let delta = fg.sub(&y).div(&fpg);
            g = g.sub(&delta);
            g.c[0] = 0.0;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_and_recip() {
        let x = Series1::variable(0.5, 5);
        let f = x.mul(&x).exp(); // exp(x^2)
        let v = (0.25f64).exp();
        assert!((f.derivative(0) - v).abs() < 1e-14);
        assert!((f.derivative(1) - v).abs() < 1e-13); // 2x e^{x^2} = e^{1/4} at x=1/2
        let g = x.recip();
        assert!((g.derivative(2) - 2.0 / 0.125).abs() < 1e-10);
    }

    #[test]
    fn inversion_round_trip() {
        // y = x + x^3 around x0 = 1: y0 = 2.
        let x = Series1::variable(1.0, 6);
        let y = x.add(&x.powi(3));
        let inv = y.invert();
        // Check d x/d y = 1 / (1 + 3x^2) = 1/4 at the base point.
        assert!((inv.derivative(1) - 0.25).abs() < 1e-13);
        // Compose y(x(.)) and check identity through several orders.
        let mut y_shift = y.clone();
        y_shift.c[0] = 0.0;
        let round = y_shift.compose(&inv);
        assert!((round.c[1] - 1.0).abs() < 1e-12);
        for k in 2..=5 {
            assert!(round.c[k].abs() < 1e-11, "order {k} residual {}", round.c[k]);
        }
    }
}
