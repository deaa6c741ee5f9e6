//! Built-in background metrics with exact derivatives: Euclidean space in
//! Cartesian and spherical charts, round spheres, the hyperbolic (Poincare)
//! ball, and the warped boundary product of the Schwarzschild family.

use crate::chart::{BoundarySpec, Chart, Coord, Side};
use crate::field::{MetricField, ScalarField, SymTensorField};
use crate::jet::Jet;
use std::f64::consts::TAU;

/// Product of `sin^2(theta_b)` over angle slots `first..first+count`.
fn sin_sq_product(x: &[Jet], first: usize, count: usize) -> Jet {
    let mut acc = Jet::constant(x[0].space(), 1.0);
    for b in 0..count {
        let s = x[first + b].sin();
        acc = &acc * &(&s * &s);
    }
    acc
}

/// Spherical-angle coordinates for `S^k`: `k - 1` polar angles and one
/// periodic azimuth.
fn sphere_coords(k: usize) -> Vec<Coord> {
    let mut coords = Vec::with_capacity(k);
    for a in 1..k {
        coords.push(Coord::polar(&format!("theta{a}")));
    }
    coords.push(Coord::periodic("phi", 0.0, TAU));
    coords
}

/// Diagonal angular block of `rho^2 * g_{S^k}` where the angle coordinates
/// occupy chart slots `first..first + k` and `rho` is a jet built from the
/// chart point (e.g. the radial coordinate).
pub fn sphere_block_component(
    x: &[Jet],
    first: usize,
    k: usize,
    slot: usize,
    rho_sq: &Jet,
) -> Jet {
    // slot is the angle index 0..k within the block.
    let pre = sin_sq_product(x, first, slot);
    rho_sq * &pre
}

/// Euclidean metric on a Cartesian box `[lo, hi]^n`.
pub fn euclidean_cartesian(n: usize, lo: f64, hi: f64) -> (Chart, MetricField) {
    let coords = (0..n).map(|i| Coord::line(&format!("x{i}"), lo, hi)).collect();
    let chart = Chart::new(coords, None).unwrap();
    let tensor = SymTensorField::from_fn(n, |i, j| {
        ScalarField::constant(n, if i == j { 1.0 } else { 0.0 })
    });
    (chart, MetricField::new(tensor, Some(0.0)))
}

fn radial_chart(n: usize, r_lo: f64, r_hi: f64, boundary: Option<BoundarySpec>) -> Chart {
    let mut coords = vec![Coord::line("r", r_lo, r_hi)];
    coords.extend(sphere_coords(n - 1));
    Chart::new(coords, boundary).unwrap()
}

/// Euclidean metric in the spherical chart of a ball of the given radius.
/// The distinguished boundary is the sphere `r = radius`.
pub fn euclidean_ball(n: usize, radius: f64) -> (Chart, MetricField) {
    let chart = radial_chart(
        n,
        0.0,
        radius,
        Some(BoundarySpec { coord: 0, level: radius, side: Side::Upper }),
    );
    let tensor = SymTensorField::from_fn(n, |i, j| {
        if i != j {
            return ScalarField::constant(n, 0.0);
        }
        if i == 0 {
            return ScalarField::constant(n, 1.0);
        }
        ScalarField::exact(n, move |x: &[Jet]| {
            let r_sq = &x[0] * &x[0];
            sphere_block_component(x, 1, x.len() - 1, i - 1, &r_sq)
        })
    });
    (chart, MetricField::new(tensor, Some(0.0)))
}

/// Euclidean metric on the annulus `inner <= r <= outer`; the distinguished
/// boundary is the outer sphere (the inner one is handled by quadrature
/// domains that carry both patches).
pub fn euclidean_annulus(n: usize, inner: f64, outer: f64) -> (Chart, MetricField) {
    let chart = radial_chart(
        n,
        inner,
        outer,
        Some(BoundarySpec { coord: 0, level: outer, side: Side::Upper }),
    );
    let (_, metric) = euclidean_ball(n, outer);
    (chart, metric)
}

/// Round sphere `S^k` of the given radius as a standalone chart.
pub fn round_sphere(k: usize, radius: f64) -> (Chart, MetricField) {
    assert!(k >= 2);
    let chart = Chart::new(sphere_coords(k), None).unwrap();
    let r_sq = radius * radius;
    let tensor = SymTensorField::from_fn(k, |i, j| {
        if i != j {
            return ScalarField::constant(k, 0.0);
        }
        ScalarField::exact(k, move |x: &[Jet]| {
            let rho = Jet::constant(x[0].space(), r_sq);
            sphere_block_component(x, 0, x.len(), i, &rho)
        })
    });
    // Ric = (k-1)/radius^2 * g, so the Einstein constant is 1/radius^2.
    (chart, MetricField::new(tensor, Some(1.0 / r_sq)))
}

/// Hyperbolic metric (Lambda = -1) on the Poincare ball in the spherical
/// chart, out to Euclidean radius `ball_radius < 1`. The boundary sphere has
/// geodesic radius `2 * artanh(ball_radius)`.
pub fn hyperbolic_ball(n: usize, ball_radius: f64) -> (Chart, MetricField) {
    assert!(ball_radius < 1.0);
    let chart = radial_chart(
        n,
        0.0,
        ball_radius,
        Some(BoundarySpec { coord: 0, level: ball_radius, side: Side::Upper }),
    );
    let tensor = SymTensorField::from_fn(n, |i, j| {
        if i != j {
            return ScalarField::constant(n, 0.0);
        }
        ScalarField::exact(n, move |x: &[Jet]| {
            let r = &x[0];
            let one_minus = -(r * r) + 1.0;
            let conf = (&one_minus.recip() * 2.0).powi(2);
            if i == 0 {
                conf
            } else {
                let r_sq = r * r;
                let ang = sphere_block_component(x, 1, x.len() - 1, i - 1, &r_sq);
                &conf * &ang
            }
        })
    });
    (chart, MetricField::new(tensor, Some(-1.0)))
}

/// Geodesic radius of the hyperbolic ball chart above.
pub fn hyperbolic_geodesic_radius(ball_radius: f64) -> f64 {
    ((1.0 + ball_radius) / (1.0 - ball_radius)).ln()
}

/// The warped product boundary metric `circle_factor * g_{S^1} + s^2 *
/// g_{S^{n-2}}` on an (n-1)-dimensional chart (omega, angles); this is the
/// induced metric on the level set `Sigma_s` of the Schwarzschild family,
/// with `circle_factor = 4 ell^2 f(s)`.
pub fn boundary_product(n: usize, circle_factor: f64, s: f64) -> (Chart, MetricField) {
    assert!(n >= 4, "product boundary needs a sphere factor");
    let k = n - 1;
    let mut coords = vec![Coord::periodic("omega", 0.0, TAU)];
    coords.extend(sphere_coords(n - 2));
    let chart = Chart::new(coords, None).unwrap();
    let s_sq = s * s;
    let tensor = SymTensorField::from_fn(k, |i, j| {
        if i != j {
            return ScalarField::constant(k, 0.0);
        }
        if i == 0 {
            return ScalarField::constant(k, circle_factor);
        }
        ScalarField::exact(k, move |x: &[Jet]| {
            let rho = Jet::constant(x[0].space(), s_sq);
            sphere_block_component(x, 1, x.len() - 1, i - 1, &rho)
        })
    });
    (chart, MetricField::new(tensor, None))
}

/// Metric scaled by a positive constant: `c * g`. An Einstein constant
/// rescales as `Lambda / c`.
pub fn scaled(metric: &MetricField, c: f64) -> MetricField {
    let n = metric.dim();
    let tensor = SymTensorField::from_fn(n, |i, j| {
        let comp = metric.tensor.comp(i, j).clone();
        ScalarField::exact(n, move |x: &[Jet]| comp.jet_from(x).scale(c))
    });
    MetricField::new(tensor, metric.einstein_constant.map(|l| l / c))
}

/// The perturbed metric `g + s * h`.
pub fn perturbed(metric: &MetricField, h: &SymTensorField, s: f64) -> MetricField {
    MetricField::new(metric.tensor.linear_comb(1.0, h, s), None)
}

/// Re-wrap every component so derivatives come from central finite
/// differences of the value closure (the cross-check twin of exact mode).
pub fn with_fd_derivatives(metric: &MetricField, scale: f64) -> MetricField {
    let n = metric.dim();
    let tensor = SymTensorField::from_fn(n, |i, j| {
        let comp = metric.tensor.comp(i, j).clone();
        ScalarField::finite_difference(n, move |x: &[f64]| comp.eval(x), scale)
    });
    MetricField::new(tensor, metric.einstein_constant)
}

/// Fix one coordinate of an ambient scalar field, producing the field it
/// induces on the level set. Evaluates the ambient jet at the embedded point
/// and keeps the tangential Taylor data, so it works for derived (penalized)
/// fields too. Meant for evaluation on plain coordinate seeds.
pub fn restrict_component(field: &ScalarField, slot: usize, level: f64) -> ScalarField {
    let field = field.clone();
    let dim = field.dim() - 1;
    ScalarField::exact(dim, move |x: &[Jet]| {
        let order = x[0].order();
        let mut point = Vec::with_capacity(dim + 1);
        let values: Vec<f64> = x.iter().map(|j| j.value()).collect();
        point.extend_from_slice(&values[..slot]);
        point.push(level);
        point.extend_from_slice(&values[slot..]);
        crate::jet::restrict_jet(&field.jet(&point, order), slot)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{einstein_residual, ricci, scalar_curv};

    #[test]
    fn euclidean_ball_is_flat_in_spherical_coordinates() {
        let (chart, g) = euclidean_ball(3, 1.0);
        let pts = chart.sample_grid(&[4, 4, 4]);
        let res = einstein_residual(&g, 0.0, &pts).unwrap();
        assert!(res < 1e-11, "residual {res}");
    }

    #[test]
    fn hyperbolic_ball_is_einstein() {
        let (chart, g) = hyperbolic_ball(3, 0.6);
        let pts = chart.sample_grid(&[4, 4, 4]);
        let res = einstein_residual(&g, -1.0, &pts).unwrap();
        assert!(res < 1e-10, "residual {res}");
        let (chart4, g4) = hyperbolic_ball(4, 0.5);
        let pts4 = chart4.sample_grid(&[3, 3, 3, 3]);
        assert!(einstein_residual(&g4, -1.0, &pts4).unwrap() < 1e-10);
    }

    #[test]
    fn sphere_scalar_curvature_scales_with_radius() {
        let (chart, g) = round_sphere(3, 2.0);
        let p = &chart.sample_grid(&[3, 3, 1])[4];
        // S^3 of radius a: R = k(k-1)/a^2 = 6/4.
        assert!((scalar_curv(&g, p).unwrap() - 1.5).abs() < 1e-11);
    }

    #[test]
    fn product_boundary_scalar_curvature() {
        // R_Sigma = (n-3)(n-2)/s^2; n = 4, s = 2 gives 1/2.
        let (chart, g) = boundary_product(4, 1.7, 2.0);
        let p = &chart.sample_grid(&[3, 3, 3])[13];
        assert!((scalar_curv(&g, p).unwrap() - 0.5).abs() < 1e-11);
        let ric = ricci(&g, p).unwrap();
        // Circle direction is flat.
        assert!(ric[(0, 0)].abs() < 1e-11);
    }

    #[test]
    fn fd_twin_matches_exact_curvature() {
        let (chart, g) = euclidean_ball(3, 1.0);
        let g_fd = with_fd_derivatives(&g, 1.0);
        let p = &chart.sample_grid(&[3, 3, 3])[14];
        let exact = ricci(&g, p).unwrap();
        let approx = ricci(&g_fd, p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (exact[(i, j)] - approx[(i, j)]).abs() < 5e-6,
                    "component ({i},{j})"
                );
            }
        }
    }
}
