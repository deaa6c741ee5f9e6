//! Hypersurface geometry of coordinate level sets: induced metric, outward
//! unit normal, second fundamental form, mean curvature, the linearized
//! boundary quantities, the boundary conformal data, and the boundary
//! operator `L_Sigma v = -Delta_Sigma v - R_Sigma v / (n-2)`.

use crate::chart::{BoundarySpec, Chart, Side};
use crate::error::{CoreError, Result};
use crate::field::{Arr2, MetricField, ScalarField, SymTensorField, VectorField};
use crate::geometry::{det_jet_matrix, invert_jet_matrix, MetricJets};
use crate::jet::{restrict_jet, Jet};

/// A coordinate level set `Sigma = { x^slot = level }` inside an ambient
/// chart, together with the ambient metric. Outward orientation is toward
/// increasing coordinate for `Side::Upper`.
#[derive(Clone)]
pub struct Hypersurface {
    pub chart: Chart,
    pub metric: MetricField,
    pub spec: BoundarySpec,
    pub sigma_chart: Chart,
}

impl Hypersurface {
    /// Use the chart's distinguished boundary.
    pub fn new(chart: &Chart, metric: &MetricField) -> Result<Hypersurface> {
        let spec = *chart.boundary().ok_or_else(|| {
            CoreError::InvalidChart("chart has no distinguished boundary".into())
        })?;
        Hypersurface::with_spec(chart, metric, spec)
    }

    /// Explicit level set (e.g. the inner sphere of an annulus).
    pub fn with_spec(
        chart: &Chart,
        metric: &MetricField,
        spec: BoundarySpec,
    ) -> Result<Hypersurface> {
        if chart.dim() < 3 {
            return Err(CoreError::UnsupportedDimension(chart.dim()));
        }
        let mut chart = chart.clone();
        chart = chart.with_boundary(spec)?;
        let sigma_chart = chart.boundary_chart()?;
        Ok(Hypersurface { chart, metric: metric.clone(), spec, sigma_chart })
    }

    pub fn ambient_dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn sigma_dim(&self) -> usize {
        self.chart.dim() - 1
    }

    /// Ambient indices of the tangential coordinates, in sigma order.
    pub fn tangent_indices(&self) -> Vec<usize> {
        self.chart.tangential_indices()
    }

    pub fn embed(&self, p_sigma: &[f64]) -> Vec<f64> {
        self.chart.embed_boundary_point(p_sigma)
    }

    /// All first and second fundamental data at a boundary point. `order` is
    /// the jet order of the induced quantities (ambient metric jets are taken
    /// one higher for the connection).
    pub fn geom(&self, p_sigma: &[f64], order: usize) -> Result<SigmaGeom> {
        SigmaGeom::new(self, p_sigma, order)
    }

    /// Field bundle view (induced metric, normal, second fundamental form,
    /// mean curvature, area element as fields on the boundary chart).
    pub fn data_fields(&self) -> HypersurfaceData {
        let sd = self.sigma_dim();
        let me = self.clone();
        let induced = SymTensorField::from_fn(sd, |a, b| {
            let me = me.clone();
            ScalarField::exact(sd, move |x: &[Jet]| {
                let p: Vec<f64> = x.iter().map(|j| j.value()).collect();
                let g = me.geom(&p, x[0].order()).expect("sigma geometry");
                g.induced.g[(a, b)].clone()
            })
        });
        let me = self.clone();
        let normal = VectorField::components_on(
            sd,
            (0..self.ambient_dim())
                .map(|k| {
                    let me = me.clone();
                    ScalarField::exact(sd, move |x: &[Jet]| {
                        let p: Vec<f64> = x.iter().map(|j| j.value()).collect();
                        let g = me.geom(&p, x[0].order()).expect("sigma geometry");
                        restrict_jet(&g.nu[k], g.slot)
                    })
                })
                .collect(),
        );
        let me = self.clone();
        let second = SymTensorField::from_fn(sd, |a, b| {
            let me = me.clone();
            ScalarField::exact(sd, move |x: &[Jet]| {
                let p: Vec<f64> = x.iter().map(|j| j.value()).collect();
                let g = me.geom(&p, x[0].order()).expect("sigma geometry");
                g.second[(a, b)].clone()
            })
            .with_penalty(1)
        });
        let me = self.clone();
        let mean_curv = ScalarField::exact(sd, move |x: &[Jet]| {
            let p: Vec<f64> = x.iter().map(|j| j.value()).collect();
            let g = me.geom(&p, x[0].order()).expect("sigma geometry");
            g.mean.clone()
        })
        .with_penalty(1);
        let me = self.clone();
        let area_element = ScalarField::exact(sd, move |x: &[Jet]| {
            let p: Vec<f64> = x.iter().map(|j| j.value()).collect();
            let g = me.geom(&p, x[0].order()).expect("sigma geometry");
            g.area.clone()
        });
        HypersurfaceData { induced_metric: induced, normal, second_fundamental: second, mean_curv, area_element }
    }
}

/// The spec'd field bundle of a hypersurface.
pub struct HypersurfaceData {
    pub induced_metric: SymTensorField,
    pub normal: VectorField,
    pub second_fundamental: SymTensorField,
    pub mean_curv: ScalarField,
    pub area_element: ScalarField,
}

/// Compute the field bundle for the chart's distinguished boundary.
pub fn hypersurface_data(chart: &Chart, metric: &MetricField) -> Result<HypersurfaceData> {
    Ok(Hypersurface::new(chart, metric)?.data_fields())
}

/// Pointwise boundary geometry: ambient jets at the embedded point plus the
/// restricted (sigma-space) first and second fundamental data.
pub struct SigmaGeom {
    pub slot: usize,
    pub sign: f64,
    pub tangent: Vec<usize>,
    /// Ambient metric jets at the embedded point (one order above `order`).
    pub ambient: MetricJets,
    /// Outward unit normal, ambient components as ambient jets.
    pub nu: Vec<Jet>,
    /// Induced metric with its sigma-space connection.
    pub induced: MetricJets,
    /// Second fundamental form `A_ab` (sigma-space jets, one order below the
    /// ambient metric jets).
    pub second: Arr2<Jet>,
    /// Mean curvature `H = tr_induced A` (sigma-space jet).
    pub mean: Jet,
    /// Area element `sqrt(det induced)`.
    pub area: Jet,
}

impl SigmaGeom {
    fn new(hs: &Hypersurface, p_sigma: &[f64], order: usize) -> Result<SigmaGeom> {
        let slot = hs.spec.coord;
        let sign = hs.spec.side.outward_sign();
        let tangent = hs.tangent_indices();
        let x = hs.embed(p_sigma);
        let amb_order = (order + 1).min(crate::jet::MAX_ORDER);
        let ambient = MetricJets::at(&hs.metric, &x, amb_order)?;
        let n = ambient.dim();
        // nu^j = sign * g^{j slot} / sqrt(g^{slot slot}).
        let root = ambient.ginv[(slot, slot)].sqrt();
        let nu: Vec<Jet> =
            (0..n).map(|j| (&ambient.ginv[(j, slot)] / &root).scale(sign)).collect();
        // Induced metric: tangential block restricted to sigma space.
        let induced_jets = Arr2::from_fn(n - 1, |a, b| {
            restrict_jet(&ambient.g[(tangent[a], tangent[b])], slot)
        });
        let area = det_jet_matrix(&induced_jets)
            .map_err(|e| CoreError::DegenerateMetric { point: x.clone(), detail: e })?
            .sqrt();
        let induced = MetricJets::from_jets(induced_jets)
            .map_err(|e| CoreError::DegenerateMetric { point: x.clone(), detail: e })?;
        // A_ab = -<nu, del_a del_b> = -sign * Gamma^slot_ab / sqrt(g^{slot slot}).
        let second = Arr2::from_fn(n - 1, |a, b| {
            let t = (&ambient.gamma[(slot, tangent[a], tangent[b])] / &root).scale(-sign);
            restrict_jet(&t, slot)
        });
        let mean = induced.trace_sym2(&second);
        Ok(SigmaGeom { slot, sign, tangent, ambient, nu, induced, second, mean, area })
    }

    pub fn sigma_dim(&self) -> usize {
        self.tangent.len()
    }

    /// Inner product of two sigma tensors in the induced metric.
    pub fn inner2(&self, s: &Arr2<Jet>, t: &Arr2<Jet>) -> Jet {
        let k = self.sigma_dim();
        let mut acc: Option<Jet> = None;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        let term = &(&self.induced.ginv[(a, c)] * &self.induced.ginv[(b, d)])
                            * &(&s[(a, b)] * &t[(c, d)]);
                        acc = Some(match acc {
                            None => term,
                            Some(v) => &v + &term,
                        });
                    }
                }
            }
        }
        acc.unwrap()
    }
}

/// Linearized boundary data of a metric perturbation at one boundary point.
pub struct LinBoundary {
    /// `nu'(h)` ambient components.
    pub nu_prime: Vec<f64>,
    /// `A'(h)` in sigma indices (jets one order below the input).
    pub a_prime: Arr2<Jet>,
    /// Tangential block `h^T` (sigma jets).
    pub h_top: Arr2<Jet>,
    /// `tr_induced h^T` (sigma jet).
    pub tr_h_top: Jet,
    /// `omega_a = h(nu, e_a)` (sigma jets).
    pub omega: Vec<Jet>,
    /// `h(nu, nu)` value.
    pub h_nu_nu: f64,
    /// `H'(h)` value.
    pub h_prime: f64,
}

/// Evaluate `nu'(h)`, `A'(h)`, `H'(h)` at a boundary point. The input order
/// controls how many tangential derivatives of the outputs remain: `order`
/// jets of `h` yield `A'` jets of `order - 1`.
pub fn lin_boundary(hs: &Hypersurface, h: &SymTensorField, p_sigma: &[f64], order: usize) -> Result<LinBoundary> {
    let geom = hs.geom(p_sigma, order)?;
    lin_boundary_at(hs, &geom, h, p_sigma, order)
}

pub fn lin_boundary_at(
    hs: &Hypersurface,
    geom: &SigmaGeom,
    h: &SymTensorField,
    p_sigma: &[f64],
    order: usize,
) -> Result<LinBoundary> {
    let x = hs.embed(p_sigma);
    let hj = h.tensor_jets_at(&x, order);
    lin_boundary_from_jets(geom, &hj)
}

impl SymTensorField {
    /// Ambient jets, named to make call sites with both charts readable.
    pub fn tensor_jets_at(&self, x: &[f64], order: usize) -> Arr2<Jet> {
        self.jets(x, order)
    }
}

/// Core of the linearized boundary formulas, from ambient jets of `h`.
pub fn lin_boundary_from_jets(geom: &SigmaGeom, hj: &Arr2<Jet>) -> Result<LinBoundary> {
    let n = geom.ambient.dim();
    let k = geom.sigma_dim();
    let slot = geom.slot;
    let tg = &geom.tangent;

    // omega_a = h(nu, e_a); h(nu, nu).
    let omega_amb: Vec<Jet> = (0..k)
        .map(|a| {
            let mut acc = &hj[(tg[a], 0)] * &geom.nu[0];
            for j in 1..n {
                acc = &acc + &(&hj[(tg[a], j)] * &geom.nu[j]);
            }
            acc
        })
        .collect();
    let omega: Vec<Jet> = omega_amb.iter().map(|w| restrict_jet(w, slot)).collect();
    let hnn = {
        let mut acc: Option<Jet> = None;
        for i in 0..n {
            for j in 0..n {
                let t = &(&hj[(i, j)] * &geom.nu[i]) * &geom.nu[j];
                acc = Some(match acc {
                    None => t,
                    Some(v) => &v + &t,
                });
            }
        }
        acc.unwrap()
    };

    // Tangential block and its induced trace.
    let h_top = Arr2::from_fn(k, |a, b| restrict_jet(&hj[(tg[a], tg[b])], slot));
    let tr_h_top = geom.induced.trace_sym2(&h_top);

    // (L_nu h)^T_ab = nu^j d_j h_ab + h_jb d_a nu^j + h_ja d_b nu^j (ambient).
    let lie_nu = Arr2::from_fn(k, |a, b| {
        let (ia, ib) = (tg[a], tg[b]);
        let mut acc = &geom.nu[0] * &hj[(ia, ib)].deriv(0);
        for j in 1..n {
            acc = &acc + &(&geom.nu[j] * &hj[(ia, ib)].deriv(j));
        }
        for j in 0..n {
            acc = &acc + &(&hj[(j, ib)] * &geom.nu[j].deriv(ia));
            acc = &acc + &(&hj[(j, ia)] * &geom.nu[j].deriv(ib));
        }
        restrict_jet(&acc, slot)
    });

    // (L_omega g^T)_ab = omega_{a|b} + omega_{b|a} with the sigma connection.
    let omega_grad = geom.induced.cov1_oneform(&omega);

    // A'(h) = 1/2 (L_nu h)^T - 1/2 L_omega g^T - 1/2 h(nu,nu) A.
    let hnn_sigma = restrict_jet(&hnn, slot);
    let a_prime = Arr2::from_fn(k, |a, b| {
        let mut t = lie_nu[(a, b)].scale(0.5);
        t = &t - &(&omega_grad[(a, b)] + &omega_grad[(b, a)]).scale(0.5);
        t = &t - &(&hnn_sigma * &geom.second[(a, b)]).scale(0.5);
        t
    });

    // H'(h) = 1/2 nu(tr_g h^T) - div_Sigma omega - 1/2 h(nu,nu) H, where the
    // tangential trace is taken on each leaf of the coordinate foliation.
    let top_inv = invert_jet_matrix(&Arr2::from_fn(k, |a, b| geom.ambient.g[(tg[a], tg[b])].clone()))
        .map_err(|e| CoreError::DegenerateMetric { point: vec![], detail: e })?;
    let tr_ambient = {
        let mut acc: Option<Jet> = None;
        for a in 0..k {
            for b in 0..k {
                let t = &top_inv[(a, b)] * &hj[(tg[a], tg[b])];
                acc = Some(match acc {
                    None => t,
                    Some(v) => &v + &t,
                });
            }
        }
        acc.unwrap()
    };
    let mut nu_tr = &geom.nu[0] * &tr_ambient.deriv(0);
    for j in 1..n {
        nu_tr = &nu_tr + &(&geom.nu[j] * &tr_ambient.deriv(j));
    }
    let mut div_omega: Option<Jet> = None;
    for a in 0..k {
        for b in 0..k {
            let t = &geom.induced.ginv[(a, b)] * &omega_grad[(a, b)];
            div_omega = Some(match div_omega {
                None => t,
                Some(v) => &v + &t,
            });
        }
    }
    let h_prime = 0.5 * nu_tr.value() - div_omega.unwrap().value()
        - 0.5 * hnn.value() * geom.mean.value();

    // nu'(h) = -1/2 h(nu,nu) nu - (g^T)^{ab} omega_a e_b (ambient components).
    let mut nu_prime = vec![0.0; n];
    for j in 0..n {
        nu_prime[j] = -0.5 * hnn.value() * geom.nu[j].value();
    }
    for a in 0..k {
        for b in 0..k {
            nu_prime[tg[b]] -= geom.induced.ginv[(a, b)].value() * omega[a].value();
        }
    }

    Ok(LinBoundary {
        nu_prime,
        a_prime,
        h_top,
        tr_h_top,
        omega,
        h_nu_nu: hnn.value(),
        h_prime,
    })
}

/// Normalize a boundary metric to unit determinant relative to the induced
/// background: returns `|gamma|^{-1/(n-1)} gamma` with
/// `|gamma| = det(gamma) / det(background)`.
pub fn conformal_normalize(
    gamma: &SymTensorField,
    background: &SymTensorField,
) -> SymTensorField {
    let k = gamma.dim();
    let gamma = gamma.clone();
    let background = background.clone();
    let expo = -1.0 / k as f64;
    SymTensorField::from_fn(k, move |a, b| {
        let gamma = gamma.clone();
        let background = background.clone();
        ScalarField::exact(k, move |x: &[Jet]| {
            let order = x[0].order();
            let p: Vec<f64> = x.iter().map(|j| j.value()).collect();
            let gj = gamma.jets(&p, order);
            let bj = background.jets(&p, order);
            let det_g = det_jet_matrix(&gj).expect("conformal rep determinant");
            let det_b = det_jet_matrix(&bj).expect("background determinant");
            let rel = &det_g / &det_b;
            &rel.powf(expo) * &gj[(a, b)]
        })
    })
}

/// Boundary conformal data: the unit-determinant representative and the mean
/// curvature.
pub struct AndersonData {
    pub conformal_rep: SymTensorField,
    pub mean_curv: ScalarField,
}

impl AndersonData {
    pub fn of(hs: &Hypersurface) -> AndersonData {
        let fields = hs.data_fields();
        let rep = conformal_normalize(&fields.induced_metric, &fields.induced_metric);
        AndersonData { conformal_rep: rep, mean_curv: fields.mean_curv }
    }
}

/// Apply `L_Sigma v = -Delta_Sigma v - R_Sigma v / (n-2)` at a boundary
/// point; errors in ambient dimension 2 where the operator is undefined.
pub fn l_sigma_apply(hs: &Hypersurface, v: &ScalarField, p_sigma: &[f64]) -> Result<f64> {
    let n = hs.ambient_dim();
    if n < 3 {
        return Err(CoreError::UnsupportedDimension(n));
    }
    let geom = hs.geom(p_sigma, 2)?;
    let vj = v.jet(p_sigma, 2);
    let hess = geom.induced.hessian_scalar(&vj);
    let mut lap = 0.0;
    let k = geom.sigma_dim();
    for a in 0..k {
        for b in 0..k {
            lap += geom.induced.ginv[(a, b)].value() * hess[(a, b)].value();
        }
    }
    let r_sigma = geom.induced.scalar().value();
    Ok(-lap - r_sigma * vj.value() / (n as f64 - 2.0))
}

/// The two conformal Cauchy residuals of a perturbation at boundary points:
/// sup norms of `h^T - (tr h^T/(n-1)) g^T` and `A'(h) - (tr h^T/(n-1)) A`.
pub fn conformal_cauchy_residual(
    hs: &Hypersurface,
    h: &SymTensorField,
    points: &[Vec<f64>],
) -> Result<(f64, f64)> {
    let k = hs.sigma_dim();
    let frac = 1.0 / k as f64;
    let mut res_top: f64 = 0.0;
    let mut res_second: f64 = 0.0;
    for p in points {
        let geom = hs.geom(p, 1)?;
        let lb = lin_boundary_at(hs, &geom, h, p, 1)?;
        for a in 0..k {
            for b in 0..k {
                let target = frac * lb.tr_h_top.value() * geom.induced.g[(a, b)].value();
                res_top = res_top.max((lb.h_top[(a, b)].value() - target).abs());
                let target2 = frac * lb.tr_h_top.value() * geom.second[(a, b)].value();
                res_second = res_second.max((lb.a_prime[(a, b)].value() - target2).abs());
            }
        }
    }
    Ok((res_top, res_second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{euclidean_ball, hyperbolic_ball, hyperbolic_geodesic_radius};

    #[test]
    fn unit_sphere_second_fundamental_form() {
        let (chart, g) = euclidean_ball(3, 1.0);
        let hs = Hypersurface::new(&chart, &g).unwrap();
        let p = [1.2, 0.7];
        let geom = hs.geom(&p, 1).unwrap();
        // A = g^T and H = n-1 on the unit sphere.
        for a in 0..2 {
            for b in 0..2 {
                let diff = geom.second[(a, b)].value() - geom.induced.g[(a, b)].value();
                assert!(diff.abs() < 1e-12);
            }
        }
        assert!((geom.mean.value() - 2.0).abs() < 1e-12);
        // Unit normal has unit length.
        let mut len = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                len += geom.ambient.g[(i, j)].value()
                    * geom.nu[i].value()
                    * geom.nu[j].value();
            }
        }
        assert!((len - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_ball_mean_curvature_is_coth() {
        let rb = 0.5;
        let (chart, g) = hyperbolic_ball(3, rb);
        let hs = Hypersurface::new(&chart, &g).unwrap();
        let geom = hs.geom(&[1.0, 2.0], 1).unwrap();
        let rho = hyperbolic_geodesic_radius(rb);
        let expect = 2.0 * (rho.cosh() / rho.sinh());
        assert!(
            (geom.mean.value() - expect).abs() < 1e-10,
            "H = {}, coth form = {expect}",
            geom.mean.value()
        );
    }

    #[test]
    fn l_sigma_kills_first_harmonics_on_unit_sphere() {
        // n = 3, boundary = round S^2 of radius 1: L_Sigma = -Delta - 2, and
        // degree-1 spherical harmonics have eigenvalue 2.
        let (chart, g) = euclidean_ball(3, 1.0);
        let hs = Hypersurface::new(&chart, &g).unwrap();
        let v = crate::testgen::first_harmonic(2); // cos(theta)
        for p in [[0.7, 0.3], [1.9, 2.5], [2.4, 5.0]] {
            let lv = l_sigma_apply(&hs, &v, &p).unwrap();
            assert!(lv.abs() < 1e-11, "L_Sigma Y1 = {lv} at {p:?}");
        }
        // Constants: L_Sigma 1 = -R/(n-2) = -2.
        let one = ScalarField::constant(2, 1.0);
        let lv = l_sigma_apply(&hs, &one, &[0.8, 0.1]).unwrap();
        assert!((lv + 2.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_dimension_two() {
        // The boundary operator needs n >= 3; ambient dimension 2 fails at
        // hypersurface construction already.
        let (chart, g) = euclidean_ball(2, 1.0);
        assert!(matches!(
            Hypersurface::new(&chart, &g),
            Err(CoreError::UnsupportedDimension(2))
        ));
    }

    #[test]
    fn lin_boundary_matches_fd_of_hypersurface_data() {
        use crate::fd_check::{fd_directional_scalar, fd_directional_sym2, DEFAULT_STEP};
        use crate::metrics::perturbed;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        let (chart, g) = euclidean_ball(3, 1.0);
        let hs = Hypersurface::new(&chart, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = crate::testgen::random_poly_sym2(3, &mut rng);
        for p in [[0.9, 0.7], [1.8, 2.9]] {
            let lb = lin_boundary(&hs, &h, &p, 1).unwrap();
            let oracle_a = fd_directional_sym2(
                |s| {
                    let gs = perturbed(&g, &h, s);
                    let hss = Hypersurface::with_spec(&chart, &gs, hs.spec).unwrap();
                    let geom = hss.geom(&p, 0)?;
                    Ok(Arr2::from_fn(2, |a, b| geom.second[(a, b)].value()))
                },
                DEFAULT_STEP,
            )
            .unwrap();
            let analytic = Arr2::from_fn(2, |a, b| lb.a_prime[(a, b)].value());
            let dev = crate::fd_check::rel_dev2(&analytic, &oracle_a.value);
            assert!(dev < 1e-6, "A' deviation {dev} at {p:?}");

            let oracle_h = fd_directional_scalar(
                |s| {
                    let gs = perturbed(&g, &h, s);
                    let hss = Hypersurface::with_spec(&chart, &gs, hs.spec).unwrap();
                    Ok(hss.geom(&p, 0)?.mean.value())
                },
                DEFAULT_STEP,
            )
            .unwrap();
            assert!(
                (lb.h_prime - oracle_h.value).abs() < 1e-6 * (1.0 + oracle_h.value.abs()),
                "H' {} vs oracle {}",
                lb.h_prime,
                oracle_h.value
            );
        }
    }

    #[test]
    fn lin_boundary_of_background_metric() {
        // h = g: h^T = g^T, tr = n-1, A'(g) = ... and H'(g) = -H/2.
        let (chart, g) = euclidean_ball(3, 1.0);
        let hs = Hypersurface::new(&chart, &g).unwrap();
        let p = [1.1, 0.6];
        let lb = lin_boundary(&hs, &g.tensor, &p, 1).unwrap();
        let geom = hs.geom(&p, 1).unwrap();
        assert!((lb.tr_h_top.value() - 2.0).abs() < 1e-12);
        assert!((lb.h_prime + 0.5 * geom.mean.value()).abs() < 1e-11);
    }

    #[test]
    fn conformal_normalize_removes_conformal_factor() {
        let (chart, g) = euclidean_ball(3, 1.0);
        let hs = Hypersurface::new(&chart, &g).unwrap();
        let fields = hs.data_fields();
        let k = 2;
        // gamma = (1 + 0.3 sin(theta)) * induced metric.
        let induced = fields.induced_metric.clone();
        let gamma = SymTensorField::from_fn(k, |a, b| {
            let base = induced.comp(a, b).clone();
            ScalarField::exact(k, move |x: &[Jet]| {
                let u = x[0].sin().scale(0.3) + 1.0;
                &u * &base.jet_from(x)
            })
        });
        let rep = conformal_normalize(&gamma, &fields.induced_metric);
        for p in [[0.9, 0.4], [2.0, 3.3]] {
            for a in 0..k {
                for b in 0..k {
                    let diff = rep.comp(a, b).eval(&p) - fields.induced_metric.comp(a, b).eval(&p);
                    assert!(diff.abs() < 1e-10, "({a},{b}) diff {diff}");
                }
            }
        }
    }
}
