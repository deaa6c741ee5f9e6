//! Chart-based fields: scalars, vectors, symmetric 2-tensors, metrics.
//!
//! Exact-mode fields evaluate on jets and expose machine-precision partials
//! to order 3; finite-difference fields wrap a plain value closure and build
//! partials from central differences with one Richardson level.

use crate::chart::Chart;
use crate::error::{CoreError, Result};
use crate::jet::{jet_space, Jet, MAX_ORDER};
use std::fmt;
use std::sync::Arc;

pub type JetFn = dyn Fn(&[Jet]) -> Jet + Send + Sync;
pub type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMode {
    Exact,
    FiniteDifference,
}

#[derive(Clone)]
enum Repr {
    Exact(Arc<JetFn>),
    Fd { f: Arc<ValueFn>, scale: f64 },
}

/// Scalar function on a chart with partial derivatives to order 3.
///
/// Fields assembled from first derivatives of other fields (Lie derivatives,
/// say) carry an order penalty: requesting a jet of order `q` seeds the
/// underlying closure at `q + penalty` (capped at 3) so the caller still
/// receives order `q` whenever the cap allows.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    repr: Repr,
    penalty: usize,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(dim={}, mode={:?})", self.dim, self.mode())
    }
}

impl ScalarField {
    pub fn exact<F>(dim: usize, f: F) -> ScalarField
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        ScalarField { dim, repr: Repr::Exact(Arc::new(f)), penalty: 0 }
    }

    pub fn finite_difference<F>(dim: usize, f: F, scale: f64) -> ScalarField
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField { dim, repr: Repr::Fd { f: Arc::new(f), scale }, penalty: 0 }
    }

    /// Mark this field as losing `p` jet orders internally (its closure
    /// differentiates its inputs `p` times).
    pub fn with_penalty(mut self, p: usize) -> ScalarField {
        self.penalty = p;
        self
    }

    pub fn penalty(&self) -> usize {
        self.penalty
    }

    pub fn constant(dim: usize, v: f64) -> ScalarField {
        ScalarField::exact(dim, move |x| Jet::constant(x[0].space(), v))
    }

    pub fn coordinate(dim: usize, i: usize) -> ScalarField {
        assert!(i < dim);
        ScalarField::exact(dim, move |x| x[i].clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> DerivativeMode {
        match self.repr {
            Repr::Exact(_) => DerivativeMode::Exact,
            Repr::Fd { .. } => DerivativeMode::FiniteDifference,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.repr {
            Repr::Exact(f) => {
                let space = jet_space(self.dim, 0);
                f(&Jet::variables(&space, x)).value()
            }
            Repr::Fd { f, .. } => f(x),
        }
    }

    /// Jet of the field at `x` with the given truncation order. Derived
    /// fields with an order penalty are seeded deeper so the result still
    /// carries order `order` when `order + penalty <= 3`.
    pub fn jet(&self, x: &[f64], order: usize) -> Jet {
        assert!(order <= MAX_ORDER);
        match &self.repr {
            Repr::Exact(f) => {
                let seed = (order + self.penalty).min(MAX_ORDER);
                let space = jet_space(self.dim, seed);
                f(&Jet::variables(&space, x))
            }
            Repr::Fd { f, scale } => {
                let space = jet_space(self.dim, order);
                let mut out = Jet::constant(&space, f(x));
                for pos in 1..space.len() {
                    let alpha = space_exponent(&space, pos);
                    let d = fd_partial(f.as_ref(), x, &alpha, *scale);
                    out = set_coeff_from_partial(out, &alpha, d);
                }
                out
            }
        }
    }

    /// Partial derivative for a list of coordinate directions, e.g.
    /// `&[0, 1, 1]` for one x- and two y-derivatives. Directions are sorted
    /// internally, so mixed partials are symmetric by construction.
    pub fn partial(&self, x: &[f64], dirs: &[usize]) -> Result<f64> {
        if dirs.len() > MAX_ORDER {
            return Err(CoreError::DerivativeOrder {
                requested: dirs.len(),
                available: MAX_ORDER,
            });
        }
        let mut alpha = vec![0u8; self.dim];
        for &d in dirs {
            alpha[d] += 1;
        }
        match &self.repr {
            Repr::Exact(_) => Ok(self.jet(x, dirs.len()).partial(&alpha)),
            Repr::Fd { f, scale } => Ok(fd_partial(f.as_ref(), x, &alpha, *scale)),
        }
    }
}

fn space_exponent(space: &Arc<crate::jet::JetSpace>, pos: usize) -> Vec<u8> {
    // Rebuild the exponent for a coefficient slot by probing a polynomial.
    // Cheap relative to the FD evaluations this path implies.
    crate::jet::exponents(space)[pos].clone()
}

fn set_coeff_from_partial(mut jet: Jet, alpha: &[u8], d: f64) -> Jet {
    let fact: f64 = alpha
        .iter()
        .map(|&k| (1..=k as usize).map(|i| i as f64).product::<f64>())
        .product();
    jet.set_raw_coeff(alpha, d / fact);
    jet
}

/// Central finite difference for a mixed partial, with one Richardson level.
/// Step sizes grow with the derivative order to balance truncation against
/// roundoff: h_k = eps^{1/(k+2)} * scale.
pub fn fd_partial(f: &ValueFn, x: &[f64], alpha: &[u8], scale: f64) -> f64 {
    let order: usize = alpha.iter().map(|&k| k as usize).sum();
    if order == 0 {
        return f(x);
    }
    let h0 = f64::EPSILON.powf(1.0 / (order as f64 + 2.0)) * scale;
    let d_h = fd_nested(f, x, alpha, h0);
    let d_h2 = fd_nested(f, x, alpha, h0 / 2.0);
    (4.0 * d_h2 - d_h) / 3.0
}

fn fd_nested(f: &ValueFn, x: &[f64], alpha: &[u8], h: f64) -> f64 {
    // Find the first direction with a remaining derivative.
    let Some(i) = alpha.iter().position(|&k| k > 0) else {
        return f(x);
    };
    let mut rest = alpha.to_vec();
    rest[i] -= 1;
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    (fd_nested(f, &xp, &rest, h) - fd_nested(f, &xm, &rest, h)) / (2.0 * h)
}

/// Vector field with one scalar component per coordinate.
#[derive(Clone, Debug)]
pub struct VectorField {
    dim: usize,
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> VectorField {
        let dim = comps.len();
        assert!(comps.iter().all(|c| c.dim() == dim));
        VectorField { dim, comps }
    }

    /// Components over a chart of a different dimension (e.g. the ambient
    /// components of a normal field living on a boundary chart).
    pub fn components_on(chart_dim: usize, comps: Vec<ScalarField>) -> VectorField {
        assert!(comps.iter().all(|c| c.dim() == chart_dim));
        VectorField { dim: chart_dim, comps }
    }

    pub fn component_count(&self) -> usize {
        self.comps.len()
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize) -> ScalarField) -> VectorField {
        VectorField::new((0..dim).map(f).collect())
    }

    pub fn zero(dim: usize) -> VectorField {
        VectorField::from_fn(dim, |_| ScalarField::constant(dim, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }

    pub fn jets(&self, x: &[f64], order: usize) -> Vec<Jet> {
        self.comps.iter().map(|c| c.jet(x, order)).collect()
    }
}

/// Symmetric (0,2)-tensor field; stores the upper triangle once, so
/// `h_ij == h_ji` holds exactly.
#[derive(Clone, Debug)]
pub struct SymTensorField {
    dim: usize,
    upper: Vec<ScalarField>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl SymTensorField {
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> ScalarField) -> SymTensorField {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                let c = f(i, j);
                assert_eq!(c.dim(), dim);
                upper.push(c);
            }
        }
        SymTensorField { dim, upper }
    }

    pub fn zero(dim: usize) -> SymTensorField {
        SymTensorField::from_fn(dim, |_, _| ScalarField::constant(dim, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn comp(&self, i: usize, j: usize) -> &ScalarField {
        &self.upper[tri_index(self.dim, i, j)]
    }

    pub fn value(&self, x: &[f64]) -> Arr2<f64> {
        Arr2::from_fn(self.dim, |i, j| self.comp(i, j).eval(x))
    }

    pub fn jets(&self, x: &[f64], order: usize) -> Arr2<Jet> {
        let vals: Vec<Jet> = self.upper.iter().map(|c| c.jet(x, order)).collect();
        Arr2::from_fn(self.dim, |i, j| vals[tri_index(self.dim, i, j)].clone())
    }

    /// Pointwise linear combination `a*self + b*other`.
    pub fn linear_comb(&self, a: f64, other: &SymTensorField, b: f64) -> SymTensorField {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        SymTensorField::from_fn(dim, |i, j| {
            let lhs = self.comp(i, j).clone();
            let rhs = other.comp(i, j).clone();
            let penalty = lhs.penalty().max(rhs.penalty());
            ScalarField::exact(dim, move |x| lhs.jet_from(x).scale(a) + rhs.jet_from(x).scale(b))
                .with_penalty(penalty)
        })
    }

    pub fn max_penalty(&self) -> usize {
        self.upper.iter().map(|c| c.penalty()).max().unwrap_or(0)
    }
}

/// The Lie derivative of a metric along a vector field, as a tensor field:
/// `(L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k`. Costs one jet
/// order (penalty 1), so third derivatives of the result are unavailable.
pub fn lie_derivative_metric(metric: &MetricField, xf: &VectorField) -> SymTensorField {
    let n = metric.dim();
    assert_eq!(xf.dim(), n);
    let metric = metric.clone();
    let xf = xf.clone();
    SymTensorField::from_fn(n, move |i, j| {
        let metric = metric.clone();
        let xf = xf.clone();
        ScalarField::exact(n, move |args: &[Jet]| {
            let xjets: Vec<Jet> = (0..n).map(|k| xf.comp(k).jet_from(args)).collect();
            let gij = metric.tensor.comp(i, j).jet_from(args);
            let mut acc = &xjets[0] * &gij.deriv(0);
            for k in 1..n {
                acc = &acc + &(&xjets[k] * &gij.deriv(k));
            }
            for k in 0..n {
                let gkj = metric.tensor.comp(k, j).jet_from(args);
                let gik = metric.tensor.comp(i, k).jet_from(args);
                acc = &acc + &(&gkj * &xjets[k].deriv(i));
                acc = &acc + &(&gik * &xjets[k].deriv(j));
            }
            acc
        })
        .with_penalty(1)
    })
}

impl ScalarField {
    /// Evaluate on already-seeded jets (for building derived fields). For
    /// finite-difference fields the inputs must be plain coordinate seeds.
    pub fn jet_from(&self, x: &[Jet]) -> Jet {
        match &self.repr {
            Repr::Exact(f) => f(x),
            Repr::Fd { .. } => {
                let order = x[0].order();
                let point: Vec<f64> = x.iter().map(|j| j.value()).collect();
                self.jet(&point, order)
            }
        }
    }
}

/// Riemannian metric on a chart: a positive-definite symmetric tensor with an
/// optional Einstein constant.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub tensor: SymTensorField,
    pub einstein_constant: Option<f64>,
}

impl MetricField {
    pub fn new(tensor: SymTensorField, einstein_constant: Option<f64>) -> MetricField {
        MetricField { tensor, einstein_constant }
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    /// Check positive definiteness (via Cholesky) on a sample grid.
    pub fn validate_positive_definite(&self, chart: &Chart, per_axis: usize) -> Result<()> {
        let counts = vec![per_axis; chart.dim()];
        for p in chart.sample_grid(&counts) {
            let g = self.tensor.value(&p);
            if !cholesky_ok(&g) {
                return Err(CoreError::DegenerateMetric {
                    point: p,
                    detail: "not positive definite".into(),
                });
            }
        }
        Ok(())
    }
}

fn cholesky_ok(a: &Arr2<f64>) -> bool {
    let n = a.n();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Small dense containers for pointwise tensor values (n is the chart dim).
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Arr2<T> {
    n: usize,
    v: Vec<T>,
}

impl<T> Arr2<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Arr2<T> {
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(f(i, j));
            }
        }
        Arr2 { n, v }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl<T> std::ops::Index<(usize, usize)> for Arr2<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.v[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Arr2<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.v[i * self.n + j]
    }
}

#[derive(Clone, Debug)]
pub struct Arr3<T> {
    n: usize,
    v: Vec<T>,
}

impl<T> Arr3<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Arr3<T> {
        let mut v = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    v.push(f(i, j, k));
                }
            }
        }
        Arr3 { n, v }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl<T> std::ops::Index<(usize, usize, usize)> for Arr3<T> {
    type Output = T;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.v[(i * self.n + j) * self.n + k]
    }
}

#[derive(Clone, Debug)]
pub struct Arr4<T> {
    n: usize,
    v: Vec<T>,
}

impl<T> Arr4<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Arr4<T> {
        let mut v = Vec::with_capacity(n * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        v.push(f(i, j, k, l));
                    }
                }
            }
        }
        Arr4 { n, v }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl<T> std::ops::Index<(usize, usize, usize, usize)> for Arr4<T> {
    type Output = T;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &T {
        &self.v[((i * self.n + j) * self.n + k) * self.n + l]
    }
}

pub fn max_abs2(a: &Arr2<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..a.n() {
        for j in 0..a.n() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_vs_fd_partials_agree() {
        let f = |x: &[f64]| (x[0] * x[1]).sin() + x[0].powi(3);
        let exact = ScalarField::exact(2, |x: &[Jet]| (&x[0] * &x[1]).sin() + x[0].powi(3));
        let fd = ScalarField::finite_difference(2, f, 1.0);
        let p = [0.6, -0.4];
        for dirs in [vec![0], vec![1], vec![0, 1], vec![0, 0], vec![0, 0, 1]] {
            let a = exact.partial(&p, &dirs).unwrap();
            let b = fd.partial(&p, &dirs).unwrap();
            let tol = if dirs.len() < 3 { 1e-7 } else { 2e-4 };
            assert!(
                (a - b).abs() < tol * (1.0 + a.abs()),
                "dirs {dirs:?}: exact {a} fd {b}"
            );
        }
    }

    #[test]
    fn fd_mixed_partials_symmetric_by_construction() {
        let fd =
            ScalarField::finite_difference(3, |x: &[f64]| (x[0] + 2.0 * x[1] * x[2]).exp(), 1.0);
        let p = [0.1, 0.2, 0.3];
        let a = fd.partial(&p, &[0, 2]).unwrap();
        let b = fd.partial(&p, &[2, 0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sym_tensor_shares_components() {
        let h = SymTensorField::from_fn(2, |i, j| ScalarField::constant(2, (i + j) as f64));
        let x = [0.0, 0.0];
        assert_eq!(h.comp(0, 1).eval(&x), h.comp(1, 0).eval(&x));
    }

    #[test]
    fn derivative_order_error() {
        let f = ScalarField::constant(2, 1.0);
        assert!(f.partial(&[0.0, 0.0], &[0, 0, 0, 0]).is_err());
    }
}
