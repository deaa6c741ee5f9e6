//! Composite quadrature on chart boxes: 2-point Gauss-Legendre panels in
//! interval coordinates (order-4 convergence under refinement), periodic
//! trapezoid on circles (exact for low trigonometric polynomials), tensor
//! products for bulk and boundary. Node counts double per refinement level.
//!
//! Integral assembly collects per-node contributions in node order and
//! reduces them pairwise, so results are bit-stable no matter how many
//! threads computed the integrand.

use crate::boundary::Hypersurface;
use crate::chart::{BoundarySpec, Chart, CoordKind};
use crate::error::Result;
use crate::field::MetricField;
use crate::geometry::det_jet_matrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// One-dimensional rule: nodes and weights over a coordinate interval.
fn line_rule(lo: f64, hi: f64, level: u32) -> (Vec<f64>, Vec<f64>) {
    let panels = 1usize << level;
    let width = (hi - lo) / panels as f64;
    let half = width / 2.0;
    let mut nodes = Vec::with_capacity(2 * panels);
    let mut weights = Vec::with_capacity(2 * panels);
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * width;
        nodes.push(mid - half * INV_SQRT3);
        weights.push(half);
        nodes.push(mid + half * INV_SQRT3);
        weights.push(half);
    }
    (nodes, weights)
}

fn circle_rule(lo: f64, hi: f64, level: u32) -> (Vec<f64>, Vec<f64>) {
    let count = (1usize << (level + 1)).max(8);
    let step = (hi - lo) / count as f64;
    let nodes = (0..count).map(|k| lo + k as f64 * step).collect();
    let weights = vec![step; count];
    (nodes, weights)
}

fn coord_rule(chart: &Chart, i: usize, level: u32) -> (Vec<f64>, Vec<f64>) {
    let c = chart.coord(i);
    match c.kind {
        CoordKind::Periodic => circle_rule(c.lo, c.hi, level),
        _ => line_rule(c.lo, c.hi, level),
    }
}

#[derive(Clone, Debug)]
pub struct NodeSet {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn tensor_product(axes: &[(Vec<f64>, Vec<f64>)]) -> NodeSet {
    let dim = axes.len();
    let total: usize = axes.iter().map(|(n, _)| n.len()).product();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let mut p = Vec::with_capacity(dim);
        let mut w = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            p.push(axes[i].0[k]);
            w *= axes[i].1[k];
        }
        nodes.push(p);
        weights.push(w);
        for i in (0..dim).rev() {
            idx[i] += 1;
            if idx[i] < axes[i].0.len() {
                break;
            }
            idx[i] = 0;
        }
    }
    NodeSet { nodes, weights }
}

/// Boundary component of a quadrature domain.
#[derive(Clone, Debug)]
pub struct BoundaryPatch {
    pub spec: BoundarySpec,
    pub rule: NodeSet,
}

/// Serializable description of a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub refinement_level: u32,
    pub bulk_nodes: usize,
    pub boundary_nodes: Vec<usize>,
}

/// Bulk and boundary nodes/weights over a chart, at one refinement level.
/// Weights are coordinate-measure weights; integrands multiply by the metric
/// volume or area element.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub level: u32,
    pub bulk: NodeSet,
    pub boundary: Vec<BoundaryPatch>,
}

impl QuadratureGrid {
    /// Build over the chart box with the given boundary patches (pass the
    /// chart's own boundary spec, plus extra components for e.g. annuli).
    pub fn build(chart: &Chart, level: u32, patches: &[BoundarySpec]) -> QuadratureGrid {
        let dim = chart.dim();
        let axes: Vec<(Vec<f64>, Vec<f64>)> =
            (0..dim).map(|i| coord_rule(chart, i, level)).collect();
        let bulk = tensor_product(&axes);
        let boundary = patches
            .iter()
            .map(|spec| {
                let sigma_axes: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
                    .filter(|i| *i != spec.coord)
                    .map(|i| coord_rule(chart, i, level))
                    .collect();
                BoundaryPatch { spec: *spec, rule: tensor_product(&sigma_axes) }
            })
            .collect();
        QuadratureGrid { level, bulk, boundary }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            refinement_level: self.level,
            bulk_nodes: self.bulk.nodes.len(),
            boundary_nodes: self.boundary.iter().map(|p| p.rule.nodes.len()).collect(),
        }
    }

    /// Coordinate-measure integral of 1 (sanity handle for the weight sum).
    pub fn coordinate_volume(&self) -> f64 {
        pairwise_sum(&self.bulk.weights)
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Integrate a pointwise function against the metric volume element over the
/// bulk nodes. The integrand is evaluated in parallel; the reduction order is
/// fixed by node order.
pub fn volume_integral<F>(grid: &QuadratureGrid, metric: &MetricField, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let contributions: Result<Vec<f64>> = grid
        .bulk
        .nodes
        .par_iter()
        .zip(grid.bulk.weights.par_iter())
        .map(|(x, w)| {
            let gj = metric.tensor.jets(x, 0);
            let det = det_jet_matrix(&gj)
                .map_err(|e| crate::error::CoreError::DegenerateMetric {
                    point: x.clone(),
                    detail: e,
                })?
                .value();
            Ok(w * f(x)? * det.sqrt())
        })
        .collect();
    Ok(pairwise_sum(&contributions?))
}

/// Integrate over one boundary patch against the induced area element. The
/// integrand receives the sigma point and the hypersurface geometry there;
/// `order` controls the jet depth of that geometry.
pub fn boundary_integral<F>(
    patch: &BoundaryPatch,
    hs: &Hypersurface,
    order: usize,
    f: F,
) -> Result<f64>
where
    F: Fn(&[f64], &crate::boundary::SigmaGeom) -> Result<f64> + Sync,
{
    let contributions: Result<Vec<f64>> = patch
        .rule
        .nodes
        .par_iter()
        .zip(patch.rule.weights.par_iter())
        .map(|(p, w)| {
            let geom = hs.geom(p, order)?;
            Ok(w * f(p, &geom)? * geom.area.value())
        })
        .collect();
    Ok(pairwise_sum(&contributions?))
}

/// Least-squares convergence order from residuals at successive refinement
/// levels (grid spacing halves per level).
pub fn fit_order(levels: &[u32], residuals: &[f64]) -> f64 {
    assert_eq!(levels.len(), residuals.len());
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > 0.0)
        .map(|(l, r)| (*l as f64, r.log2()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    -slope
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on the
/// Legendre polynomial, Chebyshev initial guesses).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..64 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x.abs();
        nodes[n - 1 - k] = x.abs();
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_and_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Gauss quadrature of a smooth function on [a, b]: compares G16
/// against two G16 half-panels and bisects until the difference passes the
/// tolerance.
pub fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn fixed(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let vals: Vec<f64> = rule
            .0
            .iter()
            .zip(&rule.1)
            .map(|(x, w)| w * half * f(mid + half * x))
            .collect();
        pairwise_sum(&vals)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        rule: &(Vec<f64>, Vec<f64>),
        depth: usize,
    ) -> f64 {
        let whole = fixed(f, a, b, rule);
        let mid = 0.5 * (a + b);
        let split = fixed(f, a, mid, rule) + fixed(f, mid, b, rule);
        if (whole - split).abs() <= tol || depth >= 24 {
            split
        } else {
            recurse(f, a, mid, tol / 2.0, rule, depth + 1)
                + recurse(f, mid, b, tol / 2.0, rule, depth + 1)
        }
    }
    let rule = gauss_legendre(16);
    recurse(f, a, b, tol, &rule, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::euclidean_ball;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // x^14 over [-1,1] = 2/15, exact for 8-point rule (degree 15).
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ball_volume_converges_at_order_four() {
        let (chart, metric) = euclidean_ball(3, 1.0);
        let expect = 4.0 * std::f64::consts::PI / 3.0;
        let errs: Vec<f64> = [3u32, 4, 5]
            .iter()
            .map(|&l| {
                let grid = QuadratureGrid::build(&chart, l, &[]);
                (volume_integral(&grid, &metric, |_| Ok(1.0)).unwrap() - expect).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] / 8.0 && errs[2] < errs[1] / 8.0, "{errs:?}");
        assert!(errs[2] < 1e-7, "{errs:?}");
        let order = fit_order(&[3, 4, 5], &errs);
        assert!(order > 3.5, "fitted order {order}");
    }

    #[test]
    fn weights_positive_and_box_volume_reproduced() {
        let (chart, _) = euclidean_ball(3, 2.0);
        let grid = QuadratureGrid::build(&chart, 2, &[]);
        assert!(grid.bulk.weights.iter().all(|w| *w > 0.0));
        let coord_vol = grid.coordinate_volume();
        let expect = 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI);
        assert!((coord_vol - expect).abs() < 1e-10);
    }

    #[test]
    fn adaptive_gauss_hits_tolerance() {
        let v = adaptive_gauss(&|x: f64| (10.0 * x).sin().exp(), 0.0, 2.0, 1e-12);
        // Cross-check with a brute composite rule.
        let rule = gauss_legendre(32);
        let mut brute = 0.0;
        let panels = 64;
        for p in 0..panels {
            let a = 2.0 * p as f64 / panels as f64;
            let b = 2.0 * (p + 1) as f64 / panels as f64;
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            brute += rule
                .0
                .iter()
                .zip(&rule.1)
                .map(|(x, w)| w * half * (10.0 * (mid + half * x)).sin().exp())
                .sum::<f64>();
        }
        assert!((v - brute).abs() < 1e-10);
    }

    #[test]
    fn convergence_order_fit() {
        let levels = [3, 4, 5];
        let residuals = [1e-3, 1e-3 / 16.0, 1e-3 / 256.0];
        let order = fit_order(&levels, &residuals);
        assert!((order - 4.0).abs() < 1e-9);
    }
}
