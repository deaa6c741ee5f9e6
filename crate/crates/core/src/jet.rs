//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] carries the value of a smooth function together with all of its
//! partial derivatives up to a truncation order (at most 3) at one chart
//! point. Arithmetic and elementary functions propagate the coefficients
//! exactly, so metric components written as ordinary closures over jets yield
//! machine-precision partials without symbolic differentiation.
//!
//! Multi-indices are enumerated in graded lexicographic order, so the
//! coefficient block of order `q` is a prefix of the block of any order
//! `p > q`. Truncating a jet is therefore just slicing.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, RwLock};

pub const MAX_ORDER: usize = 3;

/// Index tables for jets of one `(dim, order)` signature.
pub struct JetSpace {
    dim: usize,
    order: usize,
    /// Exponent vectors in graded lexicographic order; `exps[0]` is the
    /// constant term.
    exps: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// Triples `(i, j, k)` with `exps[i] + exps[j] = exps[k]`.
    mul_table: Vec<(u32, u32, u32)>,
    /// `factorial(exps[i])`, the multiplier turning a Taylor coefficient into
    /// a partial derivative.
    exp_factorial: Vec<f64>,
}

impl JetSpace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn build(dim: usize, order: usize) -> JetSpace {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut frontier: Vec<Vec<u8>> = vec![vec![0; dim]];
        exps.push(vec![0; dim]);
        for _ in 1..=order {
            let mut next: Vec<Vec<u8>> = Vec::new();
            for e in &frontier {
                for i in 0..dim {
                    let mut f = e.clone();
                    f[i] += 1;
                    if !next.contains(&f) {
                        next.push(f);
                    }
                }
            }
            next.sort();
            exps.extend(next.iter().cloned());
            frontier = next;
        }
        let lookup: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut mul_table = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                let deg: u8 = a.iter().sum::<u8>() + b.iter().sum::<u8>();
                if deg as usize > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = lookup[&sum];
                mul_table.push((i as u32, j as u32, k as u32));
            }
        }
        let exp_factorial = exps
            .iter()
            .map(|e| e.iter().map(|&k| factorial(k as usize)).product())
            .collect();
        JetSpace { dim, order, exps, lookup, mul_table, exp_factorial }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Exponent vectors of a space, in coefficient order.
pub fn exponents(space: &Arc<JetSpace>) -> &Vec<Vec<u8>> {
    &space.exps
}

/// Restrict an ambient jet to the level set of coordinate `slot`: keep the
/// coefficients with zero exponent in that slot and re-index into the jet
/// space one dimension lower. This is the tangential part of the Taylor data.
pub fn restrict_jet(ambient: &Jet, slot: usize) -> Jet {
    let dim = ambient.dim();
    assert!(dim >= 2 && slot < dim);
    let out_space = jet_space(dim - 1, ambient.order());
    let mut c = vec![0.0; out_space.len()];
    for (pos, e) in out_space.exps.iter().enumerate() {
        let mut amb_e = Vec::with_capacity(dim);
        amb_e.extend_from_slice(&e[..slot]);
        amb_e.push(0);
        amb_e.extend_from_slice(&e[slot..]);
        c[pos] = ambient.c[ambient.space.lookup[&amb_e]];
    }
    Jet { space: out_space, c }
}

static REGISTRY: Lazy<RwLock<HashMap<(usize, usize), Arc<JetSpace>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

pub fn jet_space(dim: usize, order: usize) -> Arc<JetSpace> {
    assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
    assert!(dim >= 1);
    if let Some(s) = REGISTRY.read().unwrap().get(&(dim, order)) {
        return s.clone();
    }
    let space = Arc::new(JetSpace::build(dim, order));
    REGISTRY.write().unwrap().insert((dim, order), space.clone());
    space
}

/// Value plus partial derivatives up to `space.order()` at one point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        Jet { space: space.clone(), c }
    }

    /// The `i`-th coordinate seeded at value `x`: derivative 1 in direction
    /// `i`, everything higher zero.
    pub fn variable(space: &Arc<JetSpace>, x: f64, i: usize) -> Jet {
        let mut jet = Jet::constant(space, x);
        if space.order() >= 1 {
            let mut e = vec![0u8; space.dim()];
            e[i] = 1;
            jet.c[space.lookup[&e]] = 1.0;
        }
        jet
    }

    /// Seed all coordinates of a point at once.
    pub fn variables(space: &Arc<JetSpace>, x: &[f64]) -> Vec<Jet> {
        assert_eq!(x.len(), space.dim());
        x.iter().enumerate().map(|(i, &v)| Jet::variable(space, v, i)).collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Partial derivative for the exponent vector `alpha` (e.g. `[1, 2, 0]`
    /// for one `x`- and two `y`-derivatives).
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let idx = *self
            .space
            .lookup
            .get(alpha)
            .unwrap_or_else(|| panic!("multi-index {alpha:?} outside jet order"));
        self.c[idx] * self.space.exp_factorial[idx]
    }

    /// Overwrite one raw Taylor coefficient (used by the finite-difference
    /// fallback when assembling a jet from measured partials).
    pub fn set_raw_coeff(&mut self, alpha: &[u8], coeff: f64) {
        let idx = self.space.lookup[alpha];
        self.c[idx] = coeff;
    }

    /// Truncate to a lower order (prefix of the coefficient block).
    pub fn truncated(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let space = jet_space(self.dim(), order);
        Jet { c: self.c[..space.len()].to_vec(), space }
    }

    /// Derivative in coordinate direction `k`; the result is a jet one order
    /// lower.
    pub fn deriv(&self, k: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let out_space = jet_space(self.dim(), self.order() - 1);
        let mut c = vec![0.0; out_space.len()];
        for (pos, e) in out_space.exps.iter().enumerate() {
            let mut src = e.clone();
            src[k] += 1;
            let idx = self.space.lookup[&src];
            c[pos] = self.c[idx] * (e[k] as f64 + 1.0);
        }
        Jet { space: out_space, c }
    }

    fn align<'a>(&'a self, other: &'a Jet) -> (Jet, Jet) {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        if self.order() == other.order() {
            (self.clone(), other.clone())
        } else if self.order() < other.order() {
            (self.clone(), other.truncated(self.order()))
        } else {
            (self.truncated(other.order()), other.clone())
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for v in &mut out.c {
            *v *= s;
        }
        out
    }

    pub fn add_value(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    /// Compose with a univariate function given by Taylor coefficients
    /// `coeffs[k] = f^{(k)}(value) / k!` around the jet's value.
    pub fn compose(&self, coeffs: &[f64]) -> Jet {
        let order = self.order();
        assert!(coeffs.len() > order);
        let mut nil = self.clone();
        nil.c[0] = 0.0;
        // Horner in the nilpotent part.
        let mut acc = Jet::constant(&self.space, coeffs[order]);
        for k in (0..order).rev() {
            acc = &acc * &nil;
            acc.c[0] += coeffs[k];
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        assert!(a != 0.0, "jet reciprocal at zero");
        let mut coeffs = [0.0; MAX_ORDER + 1];
        let inv = 1.0 / a;
        let mut c = inv;
        for (k, slot) in coeffs.iter_mut().enumerate().take(self.order() + 1) {
            *slot = c;
            let _ = k;
            c *= -inv;
        }
        self.compose(&coeffs[..self.order() + 1])
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        assert!(a > 0.0, "jet powf needs positive value");
        let mut coeffs = [0.0; MAX_ORDER + 1];
        let mut c = a.powf(p);
        let mut e = p;
        for k in 0..=self.order() {
            coeffs[k] = c;
            c = c * e / (a * (k as f64 + 1.0));
            e -= 1.0;
        }
        self.compose(&coeffs[..self.order() + 1])
    }

    pub fn powi(&self, p: i32) -> Jet {
        if p == 0 {
            return Jet::constant(&self.space, 1.0);
        }
        if p < 0 {
            return self.recip().powi(-p);
        }
        let mut acc = self.clone();
        for _ in 1..p {
            acc = &acc * self;
        }
        acc
    }

    pub fn sin(&self) -> Jet {
        let a = self.value();
        let (s, c) = a.sin_cos();
        let tab = [s, c, -s / 2.0, -c / 6.0];
        self.compose(&tab[..self.order() + 1])
    }

    pub fn cos(&self) -> Jet {
        let a = self.value();
        let (s, c) = a.sin_cos();
        let tab = [c, -s, -c / 2.0, s / 6.0];
        self.compose(&tab[..self.order() + 1])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let tab = [e, e, e / 2.0, e / 6.0];
        self.compose(&tab[..self.order() + 1])
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        assert!(a > 0.0, "jet ln needs positive value");
        let tab = [a.ln(), 1.0 / a, -1.0 / (2.0 * a * a), 1.0 / (3.0 * a * a * a)];
        self.compose(&tab[..self.order() + 1])
    }

    pub fn cosh(&self) -> Jet {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        let tab = [c, s, c / 2.0, s / 6.0];
        self.compose(&tab[..self.order() + 1])
    }

    pub fn sinh(&self) -> Jet {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        let tab = [s, c, s / 2.0, c / 6.0];
        self.compose(&tab[..self.order() + 1])
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let (mut a, b) = self.align(rhs);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x += y;
        }
        a
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let (mut a, b) = self.align(rhs);
        for (x, y) in a.c.iter_mut().zip(&b.c) {
            *x -= y;
        }
        a
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let (a, b) = self.align(rhs);
        let mut c = vec![0.0; a.space.len()];
        for &(i, j, k) in &a.space.mul_table {
            c[k as usize] += a.c[i as usize] * b.c[j as usize];
        }
        Jet { space: a.space, c }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! owned_ops {
    ($($trait:ident :: $fn:ident),*) => {$(
        impl $trait for Jet {
            type Output = Jet;
            fn $fn(self, rhs: Jet) -> Jet { (&self).$fn(&rhs) }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $fn(self, rhs: &Jet) -> Jet { (&self).$fn(rhs) }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $fn(self, rhs: Jet) -> Jet { self.$fn(&rhs) }
        }
    )*};
}
owned_ops!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_value(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_value(rhs)
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_value(-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_value(-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn mixed_partials_of_product() {
        // f(x, y) = x^2 y sin(y)
        let space = jet_space(2, 3);
        let (x, y) = (0.7, 1.3);
        let xs = Jet::variables(&space, &[x, y]);
        let f = &(&xs[0] * &xs[0]) * &(&xs[1] * &xs[1].sin());
        assert!(close(f.value(), x * x * y * y.sin(), 1e-14));
        // d^2f/dxdy = 2x (sin y + y cos y)
        assert!(close(f.partial(&[1, 1]), 2.0 * x * (y.sin() + y * y.cos()), 1e-13));
        // d^3f/dx^2 dy = 2 (sin y + y cos y)
        assert!(close(f.partial(&[2, 1]), 2.0 * (y.sin() + y * y.cos()), 1e-13));
        // d^3f/dy^3 = x^2 (-3 sin y - y cos y)... d/dy (y sin y) = sin y + y cos y;
        // d2 = 2cos y - y sin y; d3 = -3 sin y - y cos y
        assert!(close(f.partial(&[0, 3]), x * x * (-3.0 * y.sin() - y * y.cos()), 1e-13));
    }

    #[test]
    fn composition_and_reciprocal() {
        let space = jet_space(1, 3);
        let x = 0.4;
        let v = Jet::variable(&space, x, 0);
        let f = (&v.powi(2) + 1.0).recip(); // 1/(1+x^2)
        let d1 = -2.0 * x / (1.0 + x * x).powi(2);
        assert!(close(f.partial(&[1]), d1, 1e-13));
        let g = v.exp().ln();
        assert!(close(g.partial(&[1]), 1.0, 1e-13));
        assert!(g.partial(&[2]).abs() < 1e-12);
    }

    #[test]
    fn deriv_lowers_order() {
        let space = jet_space(2, 3);
        let xs = Jet::variables(&space, &[0.3, -0.2]);
        let f = &xs[0].powi(3) * &xs[1]; // x^3 y
        let fx = f.deriv(0); // 3x^2 y, order 2
        assert_eq!(fx.order(), 2);
        assert!(close(fx.value(), 3.0 * 0.09 * (-0.2), 1e-14));
        assert!(close(fx.partial(&[1, 1]), 6.0 * 0.3, 1e-13));
    }

    #[test]
    fn truncation_is_prefix() {
        let space = jet_space(3, 3);
        let xs = Jet::variables(&space, &[1.0, 2.0, 3.0]);
        let f = &(&xs[0] * &xs[1]) * &xs[2];
        let t = f.truncated(1);
        assert_eq!(t.order(), 1);
        assert!(close(t.partial(&[0, 1, 0]), 3.0, 1e-14));
    }
}
