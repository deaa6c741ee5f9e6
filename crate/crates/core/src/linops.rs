//! Pointwise linearized curvature operators on an Einstein background: the
//! linearized Ricci tensor and its formal adjoint, the Bianchi and Killing
//! operators, and the self-adjoint combination entering the boundary Green
//! identity. Each operator has an independent finite-difference oracle in the
//! test suite.

use crate::chart::Chart;
use crate::error::{CoreError, Result};
use crate::field::{Arr2, Arr4, MetricField, SymTensorField, VectorField};
use crate::geometry::{einstein_residual, MetricJets};
use crate::jet::Jet;

/// Tolerance the background must satisfy (sup-norm Einstein residual on a
/// coarse sample grid) before linearized operators are trusted on it.
pub const BACKGROUND_TOL: f64 = 1e-8;

/// An Einstein background on a chart; construction verifies the Einstein
/// equation on a sample grid.
pub struct LinearizedContext {
    pub chart: Chart,
    pub metric: MetricField,
    pub lambda: f64,
}

impl LinearizedContext {
    pub fn new(chart: Chart, metric: MetricField, lambda: f64) -> Result<LinearizedContext> {
        let counts = vec![3; chart.dim()];
        let pts = chart.sample_grid(&counts);
        let residual = einstein_residual(&metric, lambda, &pts)?;
        if residual > BACKGROUND_TOL {
            return Err(CoreError::NotEinstein { residual, tol: BACKGROUND_TOL });
        }
        Ok(LinearizedContext { chart, metric, lambda })
    }

    /// Skip the Einstein check (for deliberately non-Einstein backgrounds in
    /// oracle code).
    pub fn unchecked(chart: Chart, metric: MetricField, lambda: f64) -> LinearizedContext {
        LinearizedContext { chart, metric, lambda }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Curvature data at a point; `order` is the metric jet order (2 for
    /// operator values, 3 when derivatives of the result are needed).
    pub fn point(&self, x: &[f64], order: usize) -> Result<PointCtx> {
        PointCtx::new(&self.metric, x, order)
    }
}

/// Metric, connection, and curvature jets at one point, shared by all the
/// linearized operators evaluated there.
pub struct PointCtx {
    pub mj: MetricJets,
    pub ricci: Arr2<Jet>,
    pub riemann: Arr4<Jet>,
}

impl PointCtx {
    pub fn new(metric: &MetricField, x: &[f64], order: usize) -> Result<PointCtx> {
        let mj = MetricJets::at(metric, x, order)?;
        let ricci = mj.ricci();
        let riemann = mj.riemann_lowered();
        Ok(PointCtx { mj, ricci, riemann })
    }

    fn n(&self) -> usize {
        self.mj.dim()
    }

    /// Raise both indices of a symmetric 2-tensor of jets.
    fn raise2(&self, t: &Arr2<Jet>) -> Arr2<Jet> {
        let n = self.n();
        let half = self.mj.raise_first(t);
        Arr2::from_fn(n, |i, j| {
            let mut acc = &self.mj.ginv[(j, 0)] * &half[(i, 0)];
            for k in 1..n {
                acc = &acc + &(&self.mj.ginv[(j, k)] * &half[(i, k)]);
            }
            acc
        })
    }

    /// Full metric inner product of two symmetric 2-tensors.
    pub fn inner2(&self, a: &Arr2<Jet>, b: &Arr2<Jet>) -> Jet {
        let n = self.n();
        let a_up = self.raise2(a);
        let mut acc = &a_up[(0, 0)] * &b[(0, 0)];
        for i in 0..n {
            for j in 0..n {
                if i == 0 && j == 0 {
                    continue;
                }
                acc = &acc + &(&a_up[(i, j)] * &b[(i, j)]);
            }
        }
        acc
    }
}

/// Linearized Ricci tensor as jets. The inputs must carry enough orders:
/// metric order >= 2 and `h` order >= 2 for values; one more each when the
/// output is differentiated downstream.
pub fn lin_ricci_jets(pc: &PointCtx, h: &Arr2<Jet>) -> Arr2<Jet> {
    let n = pc.n();
    let mj = &pc.mj;
    let d2 = mj.cov2_sym2(h);
    let trace = mj.trace_sym2(h);
    let hess_tr = mj.hessian_scalar(&trace);
    let h_up = pc.raise2(h);
    let h_mixed = mj.raise_first(h); // h^l_j = ginv^{lk} h_{kj}
    Arr2::from_fn(n, |i, j| {
        // -1/2 g^{kl} h_{ij;kl}
        let mut acc: Option<Jet> = None;
        let mut push = |t: Jet, acc: &mut Option<Jet>| {
            *acc = Some(match acc.take() {
                None => t,
                Some(a) => &a + &t,
            });
        };
        for k in 0..n {
            for l in 0..n {
                let lap = (&mj.ginv[(k, l)] * &d2[(i, j, k, l)]).scale(-0.5);
                push(lap, &mut acc);
                // +1/2 g^{kl} (h_{ik;lj} + h_{jk;li})
                let sym = &d2[(i, k, l, j)] + &d2[(j, k, l, i)];
                push((&mj.ginv[(k, l)] * &sym).scale(0.5), &mut acc);
            }
        }
        // -1/2 (tr h)_{;ij}
        push(hess_tr[(i, j)].scale(-0.5), &mut acc);
        // +1/2 (R_{il} h^l_j + R_{jl} h^l_i)
        for l in 0..n {
            let t = &(&pc.ricci[(i, l)] * &h_mixed[(l, j)])
                + &(&pc.ricci[(j, l)] * &h_mixed[(l, i)]);
            push(t.scale(0.5), &mut acc);
        }
        // Curvature coupling; with the lowered-tensor convention of
        // `geometry` (ricci_{ij} = g^{kl} R_{kilj}) the five-term formula
        // closes with +R_{iklj} h^{kl}.
        for k in 0..n {
            for l in 0..n {
                push(&pc.riemann[(i, k, l, j)] * &h_up[(k, l)], &mut acc);
            }
        }
        acc.unwrap()
    })
}

/// Linearized scalar curvature `R'(h) = tr(Ric'(h)) - <h, Ric>` as a jet.
pub fn lin_scalar_jets(pc: &PointCtx, h: &Arr2<Jet>, ric_prime: &Arr2<Jet>) -> Jet {
    let tr = pc.mj.trace_sym2(ric_prime);
    let coupling = pc.inner2(h, &pc.ricci);
    &tr - &coupling
}

/// Bianchi operator `beta h = -div h + 1/2 d tr h` as one-form jets.
pub fn bianchi_jets(pc: &PointCtx, h: &Arr2<Jet>) -> Vec<Jet> {
    let n = pc.n();
    let div = pc.mj.div_sym2(h);
    let trace = pc.mj.trace_sym2(h);
    (0..n).map(|k| &trace.deriv(k).scale(0.5) - &div[k]).collect()
}

/// Killing operator `D X = 1/2 L_X g` as symmetric 2-tensor jets (lowered).
pub fn killing_jets(pc: &PointCtx, x_vec: &[Jet]) -> Arr2<Jet> {
    let n = pc.n();
    let lowered: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = &pc.mj.g[(i, 0)] * &x_vec[0];
            for j in 1..n {
                acc = &acc + &(&pc.mj.g[(i, j)] * &x_vec[j]);
            }
            acc
        })
        .collect();
    let grad = pc.mj.cov1_oneform(&lowered);
    Arr2::from_fn(n, |i, j| (&grad[(i, j)] + &grad[(j, i)]).scale(0.5))
}

// ---------------------------------------------------------------------------
// Value-level entry points.
// ---------------------------------------------------------------------------

fn values2(a: &Arr2<Jet>) -> Arr2<f64> {
    Arr2::from_fn(a.n(), |i, j| a[(i, j)].value())
}

/// `Ric'|_g(h)` at a point.
pub fn lin_ricci(ctx: &LinearizedContext, h: &SymTensorField, x: &[f64]) -> Result<Arr2<f64>> {
    let pc = ctx.point(x, 2)?;
    let hj = h.jets(x, 2);
    Ok(values2(&lin_ricci_jets(&pc, &hj)))
}

/// The same operator assembled by the Einstein-background decomposition
/// `-1/2 Delta h - D beta h + (n-1) Lambda h + R(h)`; an independent
/// algebraic route used for cross-checks.
pub fn lin_ricci_einstein_route(
    ctx: &LinearizedContext,
    h: &SymTensorField,
    x: &[f64],
) -> Result<Arr2<f64>> {
    let n = ctx.dim();
    let pc = ctx.point(x, 2)?;
    let hj = h.jets(x, 3);
    let d2 = pc.mj.cov2_sym2(&hj);
    // D(beta h): symmetrized covariant derivative of the one-form beta(h).
    let beta = bianchi_jets(&pc, &hj);
    let beta_grad = pc.mj.cov1_oneform(&beta);
    let h_up = pc.raise2(&hj);
    let lam = (n as f64 - 1.0) * ctx.lambda;
    Ok(Arr2::from_fn(n, |i, j| {
        let mut lap = &pc.mj.ginv[(0, 0)] * &d2[(i, j, 0, 0)];
        for k in 0..n {
            for l in 0..n {
                if k == 0 && l == 0 {
                    continue;
                }
                lap = &lap + &(&pc.mj.ginv[(k, l)] * &d2[(i, j, k, l)]);
            }
        }
        let mut acc = lap.scale(-0.5);
        acc = &acc - &(&beta_grad[(i, j)] + &beta_grad[(j, i)]).scale(0.5);
        acc = &acc + &hj[(i, j)].scale(lam);
        for k in 0..n {
            for l in 0..n {
                acc = &acc + &(&pc.riemann[(i, k, l, j)] * &h_up[(k, l)]);
            }
        }
        acc.value()
    }))
}

/// `K(h) = Ric'(h) - (n-1) Lambda h`.
pub fn operator_k(ctx: &LinearizedContext, h: &SymTensorField, x: &[f64]) -> Result<Arr2<f64>> {
    let n = ctx.dim();
    let pc = ctx.point(x, 2)?;
    let hj = h.jets(x, 2);
    let rp = lin_ricci_jets(&pc, &hj);
    let lam = (n as f64 - 1.0) * ctx.lambda;
    Ok(Arr2::from_fn(n, |i, j| rp[(i, j)].value() - lam * hj[(i, j)].value()))
}

/// `P(h) = -Ric'(h) + 1/2 R'(h) g + (n-1) Lambda h`, the operator entering
/// the Green identity.
pub fn operator_p(ctx: &LinearizedContext, h: &SymTensorField, x: &[f64]) -> Result<Arr2<f64>> {
    let pc = ctx.point(x, 2)?;
    let hj = h.jets(x, 2);
    Ok(values2(&operator_p_jets(ctx, &pc, &hj)))
}

pub fn operator_p_jets(ctx: &LinearizedContext, pc: &PointCtx, hj: &Arr2<Jet>) -> Arr2<Jet> {
    let n = pc.n();
    let rp = lin_ricci_jets(pc, hj);
    let rs = lin_scalar_jets(pc, hj, &rp);
    let lam = (n as f64 - 1.0) * ctx.lambda;
    Arr2::from_fn(n, |i, j| {
        let mut t = rp[(i, j)].scale(-1.0);
        t = &t + &(&rs * &pc.mj.g[(i, j)]).scale(0.5);
        &t + &hj[(i, j)].scale(lam)
    })
}

/// Recombination `P(h) = -K(h) + 1/2 (tr K(h)) g`; evaluated independently
/// for the algebraic identity check.
pub fn operator_p_from_k(
    ctx: &LinearizedContext,
    h: &SymTensorField,
    x: &[f64],
) -> Result<Arr2<f64>> {
    let n = ctx.dim();
    let pc = ctx.point(x, 2)?;
    let hj = h.jets(x, 2);
    let rp = lin_ricci_jets(&pc, &hj);
    let lam = (n as f64 - 1.0) * ctx.lambda;
    let k_op = Arr2::from_fn(n, |i, j| &rp[(i, j)] - &hj[(i, j)].scale(lam));
    let tr_k = pc.mj.trace_sym2(&k_op);
    Ok(Arr2::from_fn(n, |i, j| {
        -k_op[(i, j)].value() + 0.5 * tr_k.value() * pc.mj.g[(i, j)].value()
    }))
}

/// Bianchi operator value: one-form `(-div h + 1/2 d tr h)_k`.
pub fn bianchi(ctx: &LinearizedContext, h: &SymTensorField, x: &[f64]) -> Result<Vec<f64>> {
    let pc = ctx.point(x, 2)?;
    let hj = h.jets(x, 2);
    Ok(bianchi_jets(&pc, &hj).iter().map(|j| j.value()).collect())
}

/// Killing operator value: `(D X)_{ij} = 1/2 (L_X g)_{ij}`.
pub fn killing(ctx: &LinearizedContext, x_field: &VectorField, x: &[f64]) -> Result<Arr2<f64>> {
    let pc = ctx.point(x, 2)?;
    let xj = x_field.jets(x, 2);
    Ok(values2(&killing_jets(&pc, &xj)))
}

/// Residual of the vector Laplacian identity
/// `beta(D X) + 1/2 (Delta X + Ric(X, .)) = 0` at a point (max-abs over
/// components).
pub fn laplace0_residual(ctx: &LinearizedContext, x_field: &VectorField, x: &[f64]) -> Result<f64> {
    let n = ctx.dim();
    let pc = ctx.point(x, 3)?;
    let xj = x_field.jets(x, 3);
    let kappa = killing_jets(&pc, &xj);
    let beta = bianchi_jets(&pc, &kappa);
    let lowered: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = &pc.mj.g[(i, 0)] * &xj[0];
            for j in 1..n {
                acc = &acc + &(&pc.mj.g[(i, j)] * &xj[j]);
            }
            acc
        })
        .collect();
    let grad = pc.mj.cov1_oneform(&lowered);
    let hess = pc.mj.cov1_sym2(&grad); // xi_{i;j;k}
    let mut sup: f64 = 0.0;
    for i in 0..n {
        let mut lap = 0.0;
        for k in 0..n {
            for l in 0..n {
                lap += pc.mj.ginv[(k, l)].value() * hess[(i, k, l)].value();
            }
        }
        let mut ric_x = 0.0;
        for j in 0..n {
            let mut xi_up = 0.0;
            for k in 0..n {
                xi_up += pc.mj.ginv[(j, k)].value() * lowered[k].value();
            }
            ric_x += pc.ricci[(i, j)].value() * xi_up;
        }
        let res = beta[i].value() + 0.5 * (lap + ric_x);
        sup = sup.max(res.abs());
    }
    Ok(sup)
}

/// Formal adjoint `(Ric')^*(gamma) - (n-1) Lambda gamma` evaluated by the
/// displayed formula `-1/2 Delta gamma + beta^* (div gamma) + R(gamma)`.
pub fn lin_einstein_adjoint(
    ctx: &LinearizedContext,
    gamma: &SymTensorField,
    x: &[f64],
) -> Result<Arr2<f64>> {
    let pc = ctx.point(x, 2)?;
    let gj = gamma.jets(x, 2);
    Ok(values2(&adjoint_jets(&pc, &gj)))
}

fn adjoint_jets(pc: &PointCtx, gj: &Arr2<Jet>) -> Arr2<Jet> {
    let n = pc.n();
    let mj = &pc.mj;
    let d2 = mj.cov2_sym2(gj);
    let div = mj.div_sym2(gj); // one-form (lowered) divergence
    let div_grad = mj.cov1_oneform(&div);
    // div of the divergence one-form: g^{ij} W_{i;j}
    let mut div_div = &mj.ginv[(0, 0)] * &div_grad[(0, 0)];
    for i in 0..n {
        for j in 0..n {
            if i == 0 && j == 0 {
                continue;
            }
            div_div = &div_div + &(&mj.ginv[(i, j)] * &div_grad[(i, j)]);
        }
    }
    let g_up = pc.raise2(gj);
    Arr2::from_fn(n, |i, j| {
        let mut lap = &mj.ginv[(0, 0)] * &d2[(i, j, 0, 0)];
        for k in 0..n {
            for l in 0..n {
                if k == 0 && l == 0 {
                    continue;
                }
                lap = &lap + &(&mj.ginv[(k, l)] * &d2[(i, j, k, l)]);
            }
        }
        let mut acc = lap.scale(-0.5);
        // beta^* W = 1/2 (L_{W#} g - (div W) g), lowered form.
        let sym = (&div_grad[(i, j)] + &div_grad[(j, i)]).scale(0.5);
        acc = &acc + &sym;
        acc = &acc - &(&div_div * &mj.g[(i, j)]).scale(0.5);
        for k in 0..n {
            for l in 0..n {
                acc = &acc + &(&pc.riemann[(i, k, l, j)] * &g_up[(k, l)]);
            }
        }
        acc
    })
}

/// Sup-norm over the points of the one-form
/// `div((Ric')^*(gamma) - (n-1) Lambda gamma)`, which vanishes identically.
pub fn adjoint_divergence_residual(
    ctx: &LinearizedContext,
    gamma: &SymTensorField,
    points: &[Vec<f64>],
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for x in points {
        let pc = ctx.point(x, 3)?;
        let gj = gamma.jets(x, 3);
        let adj = adjoint_jets(&pc, &gj);
        let div = pc.mj.div_sym2(&adj);
        for comp in &div {
            sup = sup.max(comp.value().abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd_check::{fd_directional_sym2, rel_dev2, DEFAULT_STEP};
    use crate::field::ScalarField;
    use crate::geometry::ricci;
    use crate::metrics::{euclidean_cartesian, hyperbolic_ball, perturbed};
    use crate::testgen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat_ctx(n: usize) -> LinearizedContext {
        let (chart, g) = euclidean_cartesian(n, -1.0, 1.0);
        LinearizedContext::new(chart, g, 0.0).unwrap()
    }

    #[test]
    fn lin_ricci_of_background_vanishes() {
        let ctx = flat_ctx(3);
        let x = [0.2, -0.4, 0.6];
        let rp = lin_ricci(&ctx, &ctx.metric.tensor, &x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(rp[(i, j)].abs() < 1e-12);
            }
        }
        let (chart, g) = hyperbolic_ball(3, 0.6);
        let ctx = LinearizedContext::new(chart, g, -1.0).unwrap();
        let rp = lin_ricci(&ctx, &ctx.metric.tensor, &[0.3, 1.2, 2.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(rp[(i, j)].abs() < 1e-10, "({i},{j}) = {}", rp[(i, j)]);
            }
        }
    }

    #[test]
    fn lin_ricci_matches_fd_oracle_on_flat_background() {
        let ctx = flat_ctx(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..5 {
            let h = testgen::random_poly_sym2(3, &mut rng);
            let x = vec![0.25, -0.15, 0.4];
            let analytic = lin_ricci(&ctx, &h, &x).unwrap();
            let oracle = fd_directional_sym2(
                |s| ricci(&perturbed(&ctx.metric, &h, s), &x),
                DEFAULT_STEP,
            )
            .unwrap();
            let dev = rel_dev2(&analytic, &oracle.value);
            assert!(dev < 1e-6, "trial {trial}: rel dev {dev}");
        }
    }

    #[test]
    fn bianchi_of_metric_vanishes_and_killing_of_rotation_vanishes() {
        let ctx = flat_ctx(2);
        let x = [0.3, 0.4];
        let b = bianchi(&ctx, &ctx.metric.tensor, &x).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-13));
        // X = x d_y - y d_x is a Euclidean rotation.
        let rot = VectorField::new(vec![
            ScalarField::exact(2, |p: &[crate::jet::Jet]| -p[1].clone()),
            ScalarField::exact(2, |p: &[crate::jet::Jet]| p[0].clone()),
        ]);
        let k = killing(&ctx, &rot, &x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(k[(i, j)].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn p_equals_recombination_of_k() {
        let (chart, g) = hyperbolic_ball(3, 0.55);
        let ctx = LinearizedContext::new(chart, g, -1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = testgen::random_poly_sym2(3, &mut rng);
        let x = vec![0.31, 1.4, 2.2];
        let direct = operator_p(&ctx, &h, &x).unwrap();
        let recomb = operator_p_from_k(&ctx, &h, &x).unwrap();
        assert!(rel_dev2(&direct, &recomb) < 1e-9);
    }

    #[test]
    fn einstein_route_agrees_with_general_formula() {
        let (chart, g) = hyperbolic_ball(3, 0.55);
        let ctx = LinearizedContext::new(chart, g, -1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = testgen::random_poly_sym2(3, &mut rng);
        let x = vec![0.28, 1.1, 1.9];
        let a = lin_ricci(&ctx, &h, &x).unwrap();
        let b = lin_ricci_einstein_route(&ctx, &h, &x).unwrap();
        assert!(rel_dev2(&a, &b) < 1e-10);
    }

    #[test]
    fn laplace0_identity_flat_and_curved() {
        let ctx = flat_ctx(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xf = testgen::random_poly_vector(3, &mut rng);
        assert!(laplace0_residual(&ctx, &xf, &[0.2, 0.3, -0.1]).unwrap() < 1e-10);
        let (chart, g) = hyperbolic_ball(3, 0.5);
        let ctx = LinearizedContext::new(chart, g, -1.0).unwrap();
        let xf = testgen::random_poly_vector(3, &mut rng);
        assert!(laplace0_residual(&ctx, &xf, &[0.25, 1.3, 2.4]).unwrap() < 1e-9);
    }

    #[test]
    fn adjoint_divergence_vanishes_for_polynomials() {
        let ctx = flat_ctx(3);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let gamma = testgen::random_poly_sym2(3, &mut rng);
        let pts = vec![vec![0.1, 0.2, 0.3], vec![-0.4, 0.25, 0.05]];
        assert!(adjoint_divergence_residual(&ctx, &gamma, &pts).unwrap() < 1e-10);
    }
}
