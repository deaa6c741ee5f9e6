//! The Euclidean (anti/de-Sitter) Schwarzschild family in dimension n >= 4:
//! the profile `f(r) = 1 - 2m r^{3-n} - Lambda r^2`, its roots and smoothing
//! period, the boundary non-degeneracy criterion `p(s) = s^2 -
//! 4(n-3) ell^2 f(s)` with its critical point, the separable spectrum of the
//! boundary operator on the level sets, and the desingularizing change of
//! coordinates across the bolt.

use crate::chart::{BoundarySpec, Chart, Coord, Side};
use crate::error::{CoreError, Result};
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::jet::Jet;
use crate::metrics::sphere_block_component;
use crate::quadrature::adaptive_gauss;
use crate::series::Series1;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Family parameters; construction enforces the positivity window for
/// `Lambda > 0`: `m^2 Lambda^{n-3} < (n-3)^{n-3} / (n-1)^{n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildParams {
    pub n: usize,
    pub lambda: f64,
    pub m: f64,
}

impl SchwarzschildParams {
    pub fn new(n: usize, lambda: f64, m: f64) -> Result<SchwarzschildParams> {
        if n < 4 {
            return Err(CoreError::InvalidParams {
                inequality: "n >= 4".into(),
                detail: format!("n = {n}"),
            });
        }
        if m <= 0.0 {
            return Err(CoreError::InvalidParams {
                inequality: "m > 0".into(),
                detail: format!("m = {m}"),
            });
        }
        if lambda > 0.0 {
            let lhs = m * m * lambda.powi(n as i32 - 3);
            let rhs = positivity_threshold(n);
            if lhs >= rhs {
                return Err(CoreError::InvalidParams {
                    inequality: "m^2 Lambda^(n-3) < (n-3)^(n-3)/(n-1)^(n-1)".into(),
                    detail: format!("m^2 Lambda^(n-3) = {lhs:.9} >= {rhs:.9}"),
                });
            }
        }
        Ok(SchwarzschildParams { n, lambda, m })
    }
}

/// Right-hand side of the parameter window for positive Lambda.
pub fn positivity_threshold(n: usize) -> f64 {
    let k = n as f64 - 3.0;
    let p = n as f64 - 1.0;
    k.powf(k) / p.powf(p)
}

/// Roots of the profile and the smoothing constants.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RootData {
    pub r0: f64,
    /// Second root; `None` means the profile stays positive out to infinity.
    pub r1: Option<f64>,
    pub ell: f64,
    /// Smoothing period constant at the second root (`Lambda > 0` only).
    pub ell_hat: Option<f64>,
    /// Location of the profile maximum (`Lambda > 0` only).
    pub rstar: Option<f64>,
}

/// Boundary classification of a level set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryClass {
    Nondegenerate,
    Degenerate,
    /// |p(s)| within the tie-break band; never counted as pass or fail.
    BoundaryCase,
}

/// Width of the tie-break band around p = 0.
pub const BOUNDARY_BAND: f64 = 1e-10;

/// One eigenvalue of the boundary operator on a level set, indexed by circle
/// mode `i` and sphere degree `k`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub i: usize,
    pub k: usize,
    pub eigenvalue: f64,
}

/// The family with its root data resolved.
#[derive(Clone, Debug)]
pub struct SchwarzschildFamily {
    pub params: SchwarzschildParams,
    pub roots: RootData,
}

impl SchwarzschildFamily {
    pub fn new(params: SchwarzschildParams) -> Result<SchwarzschildFamily> {
        let roots = roots(&params)?;
        Ok(SchwarzschildFamily { params, roots })
    }

    pub fn f(&self, r: f64) -> f64 {
        profile(&self.params, r)
    }

    pub fn f_prime(&self, r: f64) -> f64 {
        profile_prime(&self.params, r)
    }

    /// Upper end of the radial domain (just inside the second root when
    /// `Lambda > 0`).
    pub fn r_max(&self) -> f64 {
        match self.roots.r1 {
            Some(r1) => r1,
            None => f64::INFINITY,
        }
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        if r <= self.roots.r0 || r >= self.r_max() {
            return Err(CoreError::OutsideDomain {
                point: vec![r],
                detail: format!(
                    "radius must lie in ({}, {})",
                    self.roots.r0,
                    self.r_max()
                ),
            });
        }
        Ok(())
    }

    /// Chart and metric of the domain `Omega_s = { r0 <= r <= s }` in the
    /// periodic-time chart `(t, r, angles)`, with the boundary at `r = s`.
    /// The chart leaves a margin above `r0` (the bolt is covered by the
    /// desingularized chart instead).
    pub fn domain(&self, s: f64) -> Result<(Chart, MetricField)> {
        self.check_radius(s)?;
        let n = self.params.n;
        let ell = self.roots.ell;
        let r_lo = self.roots.r0 + 1e-3 * (s - self.roots.r0);
        let mut coords = vec![
            Coord::periodic("t", 0.0, 4.0 * PI * ell),
            Coord::line("r", r_lo, s),
        ];
        for a in 1..=(n - 3) {
            coords.push(Coord::polar(&format!("theta{a}")));
        }
        coords.push(Coord::periodic("phi", 0.0, 2.0 * PI));
        let chart = Chart::new(coords, Some(BoundarySpec { coord: 1, level: s, side: Side::Upper }))?;
        Ok((chart, self.metric()))
    }

    /// The family metric `f dt^2 + dr^2/f + r^2 g_{S^{n-2}}` with exact
    /// derivatives; valid for `r0 < r < r1`.
    pub fn metric(&self) -> MetricField {
        let n = self.params.n;
        let params = self.params;
        let tensor = SymTensorField::from_fn(n, move |i, j| {
            if i != j {
                return ScalarField::constant(n, 0.0);
            }
            match i {
                0 => ScalarField::exact(n, move |x: &[Jet]| profile_jet(&params, &x[1])),
                1 => ScalarField::exact(n, move |x: &[Jet]| profile_jet(&params, &x[1]).recip()),
                _ => ScalarField::exact(n, move |x: &[Jet]| {
                    let r_sq = &x[1] * &x[1];
                    sphere_block_component(x, 2, x.len() - 2, i - 2, &r_sq)
                }),
            }
        });
        MetricField::new(tensor, Some(self.params.lambda))
    }

    /// Warp factor of the boundary circle: `4 ell^2 f(s)`.
    pub fn circle_factor(&self, s: f64) -> f64 {
        4.0 * self.roots.ell * self.roots.ell * self.f(s)
    }

    /// The non-degeneracy polynomial `p(s) = s^2 - 4 (n-3) ell^2 f(s)`.
    pub fn p_of_s(&self, s: f64) -> Result<f64> {
        if s < self.roots.r0 || s >= self.r_max() {
            return Err(CoreError::OutsideDomain {
                point: vec![s],
                detail: format!("s must lie in [{}, {})", self.roots.r0, self.r_max()),
            });
        }
        let k = self.params.n as f64 - 3.0;
        let ell2 = self.roots.ell * self.roots.ell;
        Ok(s * s - 4.0 * k * ell2 * self.f(s))
    }

    /// Unique positive critical point of `p`, present when the leading
    /// coefficient `1 + 4 (n-3) ell^2 Lambda` is positive.
    pub fn s_crit(&self) -> Option<f64> {
        let k = self.params.n as f64 - 3.0;
        let ell2 = self.roots.ell * self.roots.ell;
        let lead = 1.0 + 4.0 * k * ell2 * self.params.lambda;
        if lead <= 0.0 {
            return None;
        }
        Some((4.0 * k * ell2 * self.params.m / lead).powf(1.0 / (self.params.n as f64 - 1.0)))
    }

    /// Leading large-s coefficient of `p`; its sign decides positivity at
    /// infinity when `Lambda <= 0`.
    pub fn large_s_coefficient(&self) -> f64 {
        let k = self.params.n as f64 - 3.0;
        1.0 + 4.0 * k * self.roots.ell * self.roots.ell * self.params.lambda
    }

    /// Eigenvalues `lambda_{i,k} = i^2/(4 ell^2 f(s)) + (k(k+n-3)-(n-3))/s^2`
    /// on the `(i, k)` grid, sorted ascending.
    pub fn spectrum(&self, s: f64, i_max: usize, k_max: usize) -> Result<Vec<SpectrumEntry>> {
        if s < self.roots.r0 || s >= self.r_max() {
            return Err(CoreError::OutsideDomain {
                point: vec![s],
                detail: "spectrum needs r0 <= s < r1".into(),
            });
        }
        let mut out = Vec::with_capacity((i_max + 1) * (k_max + 1));
        for i in 0..=i_max {
            for k in 0..=k_max {
                out.push(SpectrumEntry { i, k, eigenvalue: self.eigenvalue(s, i, k) });
            }
        }
        out.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
        Ok(out)
    }

    pub fn eigenvalue(&self, s: f64, i: usize, k: usize) -> f64 {
        let n = self.params.n as f64;
        let circle = if i == 0 {
            0.0
        } else {
            (i * i) as f64 / (4.0 * self.roots.ell * self.roots.ell * self.f(s))
        };
        let kf = k as f64;
        circle + (kf * (kf + n - 3.0) - (n - 3.0)) / (s * s)
    }

    /// Second eigenvalue of the boundary operator: the modes are monotone in
    /// both indices, so the minimum over `(i, k) != (0, 0)` is attained at
    /// `(1, 0)` or `(0, 1)`.
    pub fn second_eigenvalue(&self, s: f64) -> f64 {
        self.eigenvalue(s, 1, 0).min(self.eigenvalue(s, 0, 1))
    }

    /// Classify the level set, cross-checking the spectral sign against the
    /// sign of `p(s)`; disagreement raises an internal-consistency error.
    pub fn nondegenerate(&self, s: f64) -> Result<(BoundaryClass, f64, f64)> {
        let p = self.p_of_s(s)?;
        let lam2 = self.second_eigenvalue(s);
        if p.abs() <= BOUNDARY_BAND {
            return Ok((BoundaryClass::BoundaryCase, p, lam2));
        }
        let class = if p > 0.0 { BoundaryClass::Nondegenerate } else { BoundaryClass::Degenerate };
        let spectral_positive = lam2 > 0.0;
        if spectral_positive != (p > 0.0) && lam2.abs() > BOUNDARY_BAND {
            return Err(CoreError::Inconsistency(format!(
                "spectral sign ({lam2:.3e}) disagrees with criterion p(s) = {p:.3e} at s = {s}"
            )));
        }
        Ok((class, p, lam2))
    }

    /// `|ell - ell_hat|` for `Lambda > 0` (the unavoidable cone angle at the
    /// second root); zero by convention otherwise.
    pub fn conical_defect(&self) -> f64 {
        match self.roots.ell_hat {
            Some(ell_hat) => (self.roots.ell - ell_hat).abs(),
            None => 0.0,
        }
    }

    /// The desingularizing profile across `r = r0`.
    pub fn desing(&self) -> Result<DesingFunction> {
        DesingFunction::build(self)
    }
}

fn profile(p: &SchwarzschildParams, r: f64) -> f64 {
    1.0 - 2.0 * p.m * r.powi(3 - p.n as i32) - p.lambda * r * r
}

fn profile_prime(p: &SchwarzschildParams, r: f64) -> f64 {
    2.0 * p.m * (p.n as f64 - 3.0) * r.powi(2 - p.n as i32) - 2.0 * p.lambda * r
}

fn profile_jet(p: &SchwarzschildParams, r: &Jet) -> Jet {
    let power = r.powi(3 - p.n as i32);
    -(power.scale(2.0 * p.m)) - (r * r).scale(p.lambda) + 1.0
}

/// Resolve the roots of the profile: closed form for `Lambda = 0`, bracketed
/// bisection plus Newton polish otherwise. `ell = 1/f'(r0)` is verified
/// against the displayed closed form.
pub fn roots(params: &SchwarzschildParams) -> Result<RootData> {
    let n = params.n as f64;
    let (r0, r1, rstar) = if params.lambda == 0.0 {
        let r0 = (2.0 * params.m).powf(1.0 / (n - 3.0));
        (polish(params, r0), None, None)
    } else if params.lambda < 0.0 {
        // f is strictly increasing from -inf to +inf.
        let mut hi = 1.0;
        while profile(params, hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(CoreError::Bracket("no sign change for Lambda < 0".into()));
            }
        }
        let r0 = bisect(params, hi * 1e-12, hi)?;
        (polish(params, r0), None, None)
    } else {
        let rstar = (params.lambda / (params.m * (n - 3.0))).powf(1.0 / (1.0 - n));
        if profile(params, rstar) <= 0.0 {
            return Err(CoreError::InvalidParams {
                inequality: "f(r*) > 0".into(),
                detail: "profile maximum not positive".into(),
            });
        }
        let mut hi = rstar * 2.0;
        while profile(params, hi) >= 0.0 {
            hi *= 2.0;
        }
        let r0 = polish(params, bisect(params, rstar * 1e-12, rstar)?);
        let r1 = polish(params, bisect(params, rstar, hi)?);
        (r0, Some(r1), Some(rstar))
    };

    let ell = 1.0 / ((n - 3.0) / r0 - (n - 1.0) * params.lambda * r0);
    // Identity check: ell * f'(r0) = 1.
    let consistency = (ell * profile_prime(params, r0) - 1.0).abs();
    if consistency > 1e-9 {
        return Err(CoreError::Inconsistency(format!(
            "ell * f'(r0) - 1 = {consistency:.3e}"
        )));
    }
    let ell_hat = r1.map(|r1| -1.0 / ((n - 3.0) / r1 - (n - 1.0) * params.lambda * r1));
    Ok(RootData { r0, r1, ell, ell_hat, rstar })
}

fn bisect(params: &SchwarzschildParams, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = profile(params, lo);
    let fhi = profile(params, hi);
    if flo.signum() == fhi.signum() {
        return Err(CoreError::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:.3e}, {fhi:.3e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = profile(params, mid);
        if fm == 0.0 || (hi - lo) < 1e-8 * mid.max(1.0) {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn polish(params: &SchwarzschildParams, mut r: f64) -> f64 {
    for _ in 0..50 {
        let step = profile(params, r) / profile_prime(params, r);
        r -= step;
        if step.abs() < 1e-15 * r.abs() {
            break;
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Desingularization.
// ---------------------------------------------------------------------------

/// The change-of-coordinates profile `F` with `ell F'/F = 1/f`, `F(r0) = 0`,
/// `F' > 0`, realized as `F(r) = (r - r0) e^{b1(r)}` where `b1` integrates
/// the smooth remainder `b0 = 1/f - ell/(r - r0)`.
#[derive(Clone)]
pub struct DesingFunction {
    pub params: SchwarzschildParams,
    pub roots: RootData,
    /// Exponent of the leading factor; the choice of `ell` forces 1.
    pub a: f64,
    /// Deflated polynomial `p` with `r^{n-3} f(r) = (r - r0) p(r)`, ascending
    /// coefficients.
    pub p_coeffs: Vec<f64>,
}

impl DesingFunction {
    fn build(family: &SchwarzschildFamily) -> Result<DesingFunction> {
        let params = family.params;
        let n = params.n;
        let r0 = family.roots.r0;
        // q(r) = r^{n-3} f(r) = -Lambda r^{n-1} + r^{n-3} - 2m, ascending.
        let mut q = vec![0.0; n];
        q[0] = -2.0 * params.m;
        q[n - 3] = 1.0;
        q[n - 1] -= params.lambda;
        while q.len() > 1 && q.last() == Some(&0.0) {
            q.pop();
        }
        // Synthetic division by (r - r0).
        let deg = q.len() - 1;
        let mut p = vec![0.0; deg];
        let mut carry = q[deg];
        for k in (0..deg).rev() {
            p[k] = carry;
            carry = q[k] + r0 * carry;
        }
        let remainder = carry;
        let p_at_r0 = eval_poly(&p, r0);
        let closed = (n as f64 - 3.0) * r0.powi(n as i32 - 4)
            - (n as f64 - 1.0) * params.lambda * r0.powi(n as i32 - 2);
        if (p_at_r0 - closed).abs() > 1e-8 * closed.abs() || remainder.abs() > 1e-8 {
            // Deflation drifted; rebuild the constant term from the series
            // limit, which is exact.
            let shift = closed - p_at_r0;
            if !p.is_empty() {
                p[0] += shift;
            }
        }
        Ok(DesingFunction { params, roots: family.roots, a: 1.0, p_coeffs: p })
    }

    fn phi_series(&self, r: f64, order: usize) -> Series1 {
        // phi(r) = r^{n-3} / p(r).
        let var = Series1::variable(r, order);
        let num = var.powi(self.params.n - 3);
        let mut den = Series1::constant(0.0, order);
        for &c in self.p_coeffs.iter().rev() {
            den = den.mul(&var);
            den.c[0] += c;
        }
        num.div(&den)
    }

    /// `b0^{(k)}(r)` through the stable divided-difference representation
    /// `b0^{(k)}(r) = int_0^1 t^k phi^{(k+1)}(r0 + t (r - r0)) dt`.
    pub fn b0_derivs(&self, r: f64, up_to: usize) -> Vec<f64> {
        let r0 = self.roots.r0;
        let (nodes, weights) = crate::quadrature::gauss_legendre(32);
        let mut out = vec![0.0; up_to + 1];
        for (slot, item) in out.iter_mut().enumerate() {
            let mut acc = Vec::with_capacity(nodes.len());
            for (x, w) in nodes.iter().zip(&weights) {
                let t = 0.5 * (x + 1.0);
                let phi = self.phi_series(r0 + t * (r - r0), slot + 2);
                acc.push(0.5 * w * t.powi(slot as i32) * phi.derivative(slot + 1));
            }
            *item = crate::quadrature::pairwise_sum(&acc);
        }
        out
    }

    pub fn b0(&self, r: f64) -> f64 {
        self.b0_derivs(r, 0)[0]
    }

    /// `b1(r) = (1/ell) int_{r0}^r b0`.
    pub fn b1(&self, r: f64) -> f64 {
        let me = self.clone();
        adaptive_gauss(&move |u| me.b0(u), self.roots.r0, r, 1e-13) / self.roots.ell
    }

    /// Taylor data of `F` at `r` to the given order (`F = (r - r0) e^{b1}`).
    pub fn f_series(&self, r: f64, order: usize) -> Series1 {
        let b = self.b0_derivs(r, order.saturating_sub(1));
        let ell = self.roots.ell;
        let mut b1s = Series1::constant(self.b1(r), order);
        let mut fact = 1.0;
        for k in 1..=order {
            fact *= k as f64;
            b1s.c[k] = b[k - 1] / (ell * fact);
        }
        let lin = {
            let mut v = Series1::constant(r - self.roots.r0, order);
            if order >= 1 {
                v.c[1] = 1.0;
            }
            v
        };
        lin.mul(&b1s.exp())
    }

    pub fn f_value(&self, r: f64) -> f64 {
        (r - self.roots.r0) * self.b1(r).exp()
    }

    pub fn f_prime(&self, r: f64) -> f64 {
        self.f_series(r, 1).derivative(1)
    }

    /// Residual of the defining relation `ell F'/F - 1/f` at `r`.
    pub fn ode_residual(&self, r: f64) -> f64 {
        let s = self.f_series(r, 1);
        let f = profile(&self.params, r);
        self.roots.ell * s.derivative(1) / s.value() - 1.0 / f
    }

    /// Invert `F(r) = u` by Newton (monotone since `F' > 0`).
    pub fn radius_from_area(&self, u: f64) -> f64 {
        assert!(u >= 0.0);
        if u == 0.0 {
            return self.roots.r0;
        }
        let mut r = self.roots.r0 + u.min(1.0);
        for _ in 0..80 {
            let s = self.f_series(r, 1);
            let step = (s.value() - u) / s.derivative(1);
            r -= step;
            if r <= self.roots.r0 {
                r = self.roots.r0 + 1e-14;
            }
            if step.abs() < 1e-14 * r {
                break;
            }
        }
        r
    }

    /// Scalar field views of the profile data on the 1-d radial chart.
    pub fn as_fields(&self) -> (ScalarField, ScalarField, ScalarField, ScalarField) {
        let me = self.clone();
        let big_f = ScalarField::exact(1, move |x: &[Jet]| {
            let s = me.f_series(x[0].value(), x[0].order().max(1));
            compose_series(&x[0], &s)
        });
        let me = self.clone();
        let big_f_prime = ScalarField::exact(1, move |x: &[Jet]| {
            let order = x[0].order().max(1) + 1;
            let s = me.f_series(x[0].value(), order.min(4));
            let ds = derivative_series(&s);
            compose_series(&x[0], &ds)
        });
        let me = self.clone();
        let b0_field = ScalarField::exact(1, move |x: &[Jet]| {
            let b = me.b0_derivs(x[0].value(), x[0].order());
            let mut coeffs = vec![0.0; x[0].order() + 1];
            let mut fact = 1.0;
            for (k, c) in coeffs.iter_mut().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                *c = b[k] / fact;
            }
            x[0].compose(&coeffs)
        });
        let me = self.clone();
        let b1_field = ScalarField::exact(1, move |x: &[Jet]| {
            let r = x[0].value();
            let order = x[0].order();
            let b = me.b0_derivs(r, order.saturating_sub(1));
            let mut coeffs = vec![0.0; order + 1];
            coeffs[0] = me.b1(r);
            let mut fact = 1.0;
            for k in 1..=order {
                fact *= k as f64;
                coeffs[k] = b[k - 1] / (me.roots.ell * fact);
            }
            x[0].compose(&coeffs)
        });
        (big_f, big_f_prime, b0_field, b1_field)
    }

    /// The desingularized chart `(x, y, angles)` with metric
    /// `(4 ell / F'(r)) (dx^2 + dy^2) + r^2 g_{S^{n-2}}` where `F(r) = x^2 +
    /// y^2`; covers a disk of coordinate radius `sqrt(F(r_cap))` around the
    /// bolt.
    pub fn desingularized_chart(&self, r_cap: f64) -> Result<(Chart, MetricField)> {
        let n = self.params.n;
        let w = self.f_value(r_cap).sqrt();
        let mut coords = vec![Coord::line("x", -w, w), Coord::line("y", -w, w)];
        for a in 1..=(n - 3) {
            coords.push(Coord::polar(&format!("theta{a}")));
        }
        coords.push(Coord::periodic("phi", 0.0, 2.0 * PI));
        let chart = Chart::new(coords, None)?;

        let me = Arc::new(self.clone());
        let ell = self.roots.ell;
        let tensor = SymTensorField::from_fn(n, move |i, j| {
            let me = me.clone();
            if i != j {
                return ScalarField::constant(n, 0.0);
            }
            if i <= 1 {
                ScalarField::exact(n, move |x: &[Jet]| {
                    let u = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
                    let coeffs = me.conformal_taylor(u.value(), u.order());
                    u.compose(&coeffs).scale(4.0 * ell)
                })
            } else {
                ScalarField::exact(n, move |x: &[Jet]| {
                    let u = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
                    let coeffs = me.radius_sq_taylor(u.value(), u.order());
                    let rsq = u.compose(&coeffs);
                    sphere_block_component(x, 2, x.len() - 2, i - 2, &rsq)
                })
            }
        });
        Ok((chart, MetricField::new(tensor, Some(self.params.lambda))))
    }

    /// Taylor coefficients in `u` of `1/F'(r(u))` at `u0`.
    fn conformal_taylor(&self, u0: f64, order: usize) -> Vec<f64> {
        let r = self.radius_from_area(u0);
        let fs = self.f_series(r, order + 1);
        let r_of_u = fs.invert(); // series of r - r0bar in (u - u0)
        let fps = derivative_series(&fs);
        let composed = compose_centered(&fps, &r_of_u);
        composed.recip().c[..=order].to_vec()
    }

    /// Taylor coefficients in `u` of `r(u)^2` at `u0`.
    fn radius_sq_taylor(&self, u0: f64, order: usize) -> Vec<f64> {
        let r = self.radius_from_area(u0);
        let fs = self.f_series(r, order + 1);
        let mut r_of_u = fs.invert();
        r_of_u.c[0] = r;
        r_of_u.mul(&r_of_u).c[..=order].to_vec()
    }
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Compose a jet with a `Series1` expansion around the jet's value.
fn compose_series(jet: &Jet, s: &Series1) -> Jet {
    let order = jet.order();
    let mut coeffs = vec![0.0; order + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c = if k < s.c.len() { s.c[k] } else { 0.0 };
    }
    jet.compose(&coeffs)
}

/// Series of the derivative: shift coefficients down.
fn derivative_series(s: &Series1) -> Series1 {
    let n = s.order();
    let mut c = Vec::with_capacity(n);
    for k in 1..=n {
        c.push(s.c[k] * k as f64);
    }
    if c.is_empty() {
        c.push(0.0);
    }
    Series1 { c }
}

/// Compose an outer series (expanded at the inner's base value) with an inner
/// series that has zero constant term.
fn compose_centered(outer: &Series1, inner: &Series1) -> Series1 {
    let order = outer.order().min(inner.order());
    let mut out_t = outer.clone();
    out_t.c.truncate(order + 1);
    let mut in_t = inner.clone();
    in_t.c.truncate(order + 1);
    out_t.compose(&in_t)
}

/// One row of a parameter sweep (CSV/JSON payload for the front end).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub lambda: f64,
    pub m: f64,
    pub s: f64,
    pub r0: f64,
    pub r1: Option<f64>,
    pub ell: f64,
    pub p: f64,
    pub lambda_min: f64,
    pub class: BoundaryClass,
}

/// Evaluate the criterion and spectral classification over an `s` grid.
pub fn sweep(family: &SchwarzschildFamily, s_values: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let (class, p, lam2) = family.nondegenerate(s)?;
        rows.push(SweepRow {
            n: family.params.n,
            lambda: family.params.lambda,
            m: family.params.m,
            s,
            r0: family.roots.r0,
            r1: family.roots.r1,
            ell: family.roots.ell,
            p,
            lambda_min: lam2,
            class,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::einstein_residual;

    fn family(n: usize, lambda: f64, m: f64) -> SchwarzschildFamily {
        SchwarzschildFamily::new(SchwarzschildParams::new(n, lambda, m).unwrap()).unwrap()
    }

    #[test]
    fn flat_four_dimensional_constants() {
        let fam = family(4, 0.0, 1.0);
        assert!((fam.roots.r0 - 2.0).abs() < 1e-13);
        assert!((fam.roots.ell - 2.0).abs() < 1e-13);
        let sc = fam.s_crit().unwrap();
        assert!((sc - 16f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let p_sc = fam.p_of_s(sc).unwrap();
        assert!((p_sc - (3.0 * 16f64.powf(2.0 / 3.0) - 16.0)).abs() < 1e-11);
        // p(r0) = r0^2.
        assert!((fam.p_of_s(2.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn five_dimensional_flat_roots() {
        let fam = family(5, 0.0, 2.0);
        assert!((fam.roots.r0 - 2.0).abs() < 1e-13);
        assert!((fam.roots.ell - 1.0).abs() < 1e-13);
    }

    #[test]
    fn lambda_window_enforced() {
        // n = 4: threshold m^2 Lambda = 1/27.
        assert!(SchwarzschildParams::new(4, 0.05, 1.0).is_err());
        assert!(SchwarzschildParams::new(4, 0.0369, 1.0).is_ok());
        assert!(SchwarzschildParams::new(4, 1.0 / 27.0, 1.0).is_err());
        let fam = family(4, 1.0 / 64.0, 1.0);
        let (r0, r1) = (fam.roots.r0, fam.roots.r1.unwrap());
        assert!(fam.f(r0).abs() < 1e-12 && fam.f(r1).abs() < 1e-12);
        assert!(r0 < fam.roots.rstar.unwrap() && fam.roots.rstar.unwrap() < r1);
    }

    #[test]
    fn metric_values_and_einstein_residual() {
        let fam = family(4, 0.0, 1.0);
        let g = fam.metric();
        // f(3) = 1/3.
        let p = [0.0, 3.0, 1.0, 0.5];
        let vals = g.tensor.value(&p);
        assert!((vals[(0, 0)] - 1.0 / 3.0).abs() < 1e-14);
        assert!((vals[(1, 1)] - 3.0).abs() < 1e-13);
        let (chart, _) = fam.domain(4.0).unwrap();
        let pts = chart.sample_grid(&[3, 5, 4, 3]);
        assert!(einstein_residual(&g, 0.0, &pts).unwrap() < 1e-9);
    }

    #[test]
    fn ads_and_ds_einstein_residual() {
        let fam = family(4, -1.0, 1.0);
        let (chart, g) = fam.domain(2.0).unwrap();
        let pts = chart.sample_grid(&[3, 4, 4, 3]);
        assert!(einstein_residual(&g, -1.0, &pts).unwrap() < 1e-9);
        let fam = family(5, 0.02, 1.0);
        let s = 0.5 * (fam.roots.r0 + fam.roots.r1.unwrap());
        let (chart, g) = fam.domain(s).unwrap();
        let pts = chart.sample_grid(&[3, 4, 3, 3, 3]);
        assert!(einstein_residual(&g, 0.02, &pts).unwrap() < 1e-9);
    }

    #[test]
    fn spectral_classification_agrees_with_criterion() {
        let fam = family(4, 0.0, 1.0);
        for s in [2.0, 2.2, 2.5198, 4.0, 9.0] {
            let (class, p, lam2) = fam.nondegenerate(s).unwrap();
            assert_eq!(class, BoundaryClass::Nondegenerate, "s = {s}, p = {p}, l2 = {lam2}");
        }
        // First eigenvalue at (0,0) is -(n-3)/s^2.
        assert!((fam.eigenvalue(2.0, 0, 0) + 0.25).abs() < 1e-14);
        assert!((fam.eigenvalue(2.0, 0, 1) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn degenerate_band_exists_for_very_negative_lambda() {
        // For Lambda far below the threshold the large-s criterion fails.
        let fam = family(4, -3.0, 1.0);
        assert!(fam.large_s_coefficient() < 0.0);
        let r0 = fam.roots.r0;
        let (class, p, _) = fam.nondegenerate(40.0 * r0).unwrap();
        assert!(p < 0.0);
        assert_eq!(class, BoundaryClass::Degenerate);
    }

    #[test]
    fn desing_profile_solves_the_ode() {
        let fam = family(4, 0.0, 1.0);
        let d = fam.desing().unwrap();
        assert_eq!(d.a, 1.0);
        // p(r0) closed form.
        assert!((eval_poly(&d.p_coeffs, 2.0) - 1.0).abs() < 1e-12);
        for r in [2.01, 2.5, 4.0, 10.0] {
            let res = d.ode_residual(r);
            assert!(res.abs() < 1e-9, "ODE residual {res} at r = {r}");
        }
        // F(r)/(r - r0) tends to a positive limit.
        let ratio = d.f_value(2.0 + 1e-7) / 1e-7;
        assert!(ratio > 0.0 && ratio.is_finite());
        // F' > 0 across the domain.
        for r in [2.0001, 3.0, 8.0] {
            assert!(d.f_prime(r) > 0.0);
        }
    }

    #[test]
    fn desingularized_chart_is_einstein_near_the_bolt() {
        let fam = family(4, 0.0, 1.0);
        let d = fam.desing().unwrap();
        let (chart, g) = d.desingularized_chart(2.2).unwrap();
        // Points with x^2 + y^2 = F(r) in (0, 0.01].
        let mut pts = Vec::new();
        for &u in &[1e-4, 1e-3, 0.005, 0.01] {
            let w = (u as f64).sqrt();
            pts.push(vec![w, 0.0, 1.0, 0.7]);
            pts.push(vec![w / 2.0_f64.sqrt(), w / 2.0_f64.sqrt(), 2.0, 0.3]);
        }
        let res = einstein_residual(&g, 0.0, &pts).unwrap();
        assert!(res < 1e-6, "residual {res}");
        let _ = chart;
    }

    #[test]
    fn desingularized_chart_matches_periodic_chart() {
        let fam = family(4, 0.0, 1.0);
        let d = fam.desing().unwrap();
        let (_, g_desing) = d.desingularized_chart(3.0).unwrap();
        // Pull back through (t, r) -> (x, y) and compare with f dt^2 + dr^2/f.
        let ell = fam.roots.ell;
        for (t, r) in [(0.3, 2.4), (1.0, 2.8)] {
            let big_f = d.f_value(r);
            let fp = d.f_prime(r);
            let (c, s) = ((t / (2.0 * ell)).cos(), (t / (2.0 * ell)).sin());
            let sq = big_f.sqrt();
            let x = sq * c;
            let y = sq * s;
            let vals = g_desing.tensor.value(&[x, y, 1.0, 0.5]);
            let a = vals[(0, 0)];
            // Jacobian of (x, y) wrt (t, r).
            let dx = [-sq * s / (2.0 * ell), fp / (2.0 * sq) * c];
            let dy = [sq * c / (2.0 * ell), fp / (2.0 * sq) * s];
            let g_tt = a * (dx[0] * dx[0] + dy[0] * dy[0]);
            let g_rr = a * (dx[1] * dx[1] + dy[1] * dy[1]);
            let g_tr = a * (dx[0] * dx[1] + dy[0] * dy[1]);
            let f = fam.f(r);
            assert!((g_tt - f).abs() < 1e-8, "g_tt {g_tt} vs {f}");
            assert!((g_rr - 1.0 / f).abs() < 1e-8);
            assert!(g_tr.abs() < 1e-10);
        }
    }

    #[test]
    fn conical_defect_positive_for_positive_lambda() {
        let fam = family(4, 1.0 / 64.0, 1.0);
        assert!(fam.conical_defect() > 0.0);
        let fam = family(4, 0.0, 1.0);
        assert_eq!(fam.conical_defect(), 0.0);
    }
}
