//! Pointwise curvature of a metric on a chart: Christoffel symbols, Riemann
//! and Ricci tensors, scalar curvature, and covariant-derivative helpers.
//!
//! Conventions: `R^m_{s u v} = d_u Gamma^m_{vs} - d_v Gamma^m_{us} + ...`,
//! `ricci_{sv} = R^m_{smv}`, and the lowered tensor `R_{msuv}` contracts to
//! Ricci on its first and third slots: `ricci_{ij} = g^{kl} R_{kilj}`. With
//! this choice round spheres have positive scalar curvature.

use crate::error::{CoreError, Result};
use crate::field::{max_abs2, Arr2, Arr3, Arr4, MetricField};
use crate::jet::{jet_space, Jet};

/// All jet-level data of a metric at one point, from which curvature and
/// covariant derivatives are assembled.
pub struct MetricJets {
    n: usize,
    pub g: Arr2<Jet>,
    pub ginv: Arr2<Jet>,
    /// `gamma[(k, i, j)] = Gamma^k_{ij}`, one order below the metric jets.
    pub gamma: Arr3<Jet>,
}

impl MetricJets {
    /// Evaluate metric jets of the given order (2 for curvature values,
    /// 3 when derivatives of curvature are needed downstream).
    pub fn at(metric: &MetricField, x: &[f64], order: usize) -> Result<MetricJets> {
        let n = metric.dim();
        assert_eq!(x.len(), n);
        let g = metric.tensor.jets(x, order);
        Self::from_jets(g).map_err(|detail| CoreError::DegenerateMetric {
            point: x.to_vec(),
            detail,
        })
    }

    /// Build the connection data from already-evaluated metric jets (used for
    /// induced metrics on level sets, whose jets come from restriction).
    pub fn from_jets(g: Arr2<Jet>) -> std::result::Result<MetricJets, String> {
        let n = g.n();
        let ginv = invert_jet_matrix(&g)?;
        let gamma = christoffel_from_jets(&g, &ginv);
        Ok(MetricJets { n, g, ginv, gamma })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R^m_{s u v}` as jets one order below `gamma`.
    pub fn riemann_mixed(&self) -> Arr4<Jet> {
        let n = self.n;
        let gm = &self.gamma;
        Arr4::from_fn(n, |m, s, u, v| {
            let mut t = &gm[(m, v, s)].deriv(u) - &gm[(m, u, s)].deriv(v);
            for l in 0..n {
                t = &t + &(&gm[(m, u, l)] * &gm[(l, v, s)]);
                t = &t - &(&gm[(m, v, l)] * &gm[(l, u, s)]);
            }
            t
        })
    }

    /// Lowered curvature `R_{msuv} = g_{mk} R^k_{suv}`.
    pub fn riemann_lowered(&self) -> Arr4<Jet> {
        let rm = self.riemann_mixed();
        let n = self.n;
        Arr4::from_fn(n, |m, s, u, v| {
            let mut t = &self.g[(m, 0)] * &rm[(0, s, u, v)];
            for k in 1..n {
                t = &t + &(&self.g[(m, k)] * &rm[(k, s, u, v)]);
            }
            t
        })
    }

    pub fn ricci(&self) -> Arr2<Jet> {
        let rm = self.riemann_mixed();
        let n = self.n;
        Arr2::from_fn(n, |s, v| {
            let mut t = rm[(0, s, 0, v)].clone();
            for m in 1..n {
                t = &t + &rm[(m, s, m, v)];
            }
            t
        })
    }

    pub fn scalar(&self) -> Jet {
        let ric = self.ricci();
        self.trace_sym2(&ric)
    }

    /// `g^{ij} t_{ij}` for a symmetric 2-tensor of jets.
    pub fn trace_sym2(&self, t: &Arr2<Jet>) -> Jet {
        let n = self.n;
        let mut acc = &self.ginv[(0, 0)] * &t[(0, 0)];
        for i in 0..n {
            for j in 0..n {
                if i == 0 && j == 0 {
                    continue;
                }
                acc = &acc + &(&self.ginv[(i, j)] * &t[(i, j)]);
            }
        }
        acc
    }

    /// First covariant derivative of a symmetric 2-tensor:
    /// `out[(i, j, k)] = t_{ij;k}`.
    pub fn cov1_sym2(&self, t: &Arr2<Jet>) -> Arr3<Jet> {
        let n = self.n;
        Arr3::from_fn(n, |i, j, k| {
            let mut d = t[(i, j)].deriv(k);
            for m in 0..n {
                d = &d - &(&self.gamma[(m, k, i)] * &t[(m, j)]);
                d = &d - &(&self.gamma[(m, k, j)] * &t[(i, m)]);
            }
            d
        })
    }

    /// Second covariant derivative: `out[(i, j, k, l)] = t_{ij;k;l}`
    /// (differentiate first in `k`, then in `l`).
    pub fn cov2_sym2(&self, t: &Arr2<Jet>) -> Arr4<Jet> {
        let n = self.n;
        let t1 = self.cov1_sym2(t);
        Arr4::from_fn(n, |i, j, k, l| {
            let mut d = t1[(i, j, k)].deriv(l);
            for m in 0..n {
                d = &d - &(&self.gamma[(m, l, i)] * &t1[(m, j, k)]);
                d = &d - &(&self.gamma[(m, l, j)] * &t1[(i, m, k)]);
                d = &d - &(&self.gamma[(m, l, k)] * &t1[(i, j, m)]);
            }
            d
        })
    }

    /// Covariant derivative of a one-form: `out[(i, j)] = w_{i;j}`.
    pub fn cov1_oneform(&self, w: &[Jet]) -> Arr2<Jet> {
        let n = self.n;
        Arr2::from_fn(n, |i, j| {
            let mut d = w[i].deriv(j);
            for m in 0..n {
                d = &d - &(&self.gamma[(m, j, i)] * &w[m]);
            }
            d
        })
    }

    /// Covariant derivative of a vector: `out[(i, j)] = X^i_{;j}`.
    pub fn cov1_vector(&self, x: &[Jet]) -> Arr2<Jet> {
        let n = self.n;
        Arr2::from_fn(n, |i, j| {
            let mut d = x[i].deriv(j);
            for m in 0..n {
                d = &d + &(&self.gamma[(i, j, m)] * &x[m]);
            }
            d
        })
    }

    /// Hessian of a scalar jet: `out[(i, j)] = u_{;ij}`.
    pub fn hessian_scalar(&self, u: &Jet) -> Arr2<Jet> {
        let n = self.n;
        let grad: Vec<Jet> = (0..n).map(|k| u.deriv(k)).collect();
        Arr2::from_fn(n, |i, j| {
            let mut d = grad[i].deriv(j);
            for m in 0..n {
                d = &d - &(&self.gamma[(m, i, j)] * &grad[m]);
            }
            d
        })
    }

    /// Divergence of a symmetric 2-tensor: `(div t)_j = g^{ik} t_{jk;i}`.
    pub fn div_sym2(&self, t: &Arr2<Jet>) -> Vec<Jet> {
        let n = self.n;
        let t1 = self.cov1_sym2(t);
        (0..n)
            .map(|j| {
                let mut acc = &self.ginv[(0, 0)] * &t1[(j, 0, 0)];
                for i in 0..n {
                    for k in 0..n {
                        if i == 0 && k == 0 {
                            continue;
                        }
                        acc = &acc + &(&self.ginv[(i, k)] * &t1[(j, k, i)]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Raise one index: `t^i_j = g^{ik} t_{kj}` (value output).
    pub fn raise_first(&self, t: &Arr2<Jet>) -> Arr2<Jet> {
        let n = self.n;
        Arr2::from_fn(n, |i, j| {
            let mut acc = &self.ginv[(i, 0)] * &t[(0, j)];
            for k in 1..n {
                acc = &acc + &(&self.ginv[(i, k)] * &t[(k, j)]);
            }
            acc
        })
    }
}

fn christoffel_from_jets(g: &Arr2<Jet>, ginv: &Arr2<Jet>) -> Arr3<Jet> {
    let n = g.n();
    let dg = Arr3::from_fn(n, |i, j, k| g[(j, k)].deriv(i)); // dg[(i,j,k)] = d_i g_jk
    Arr3::from_fn(n, |k, i, j| {
        let mut acc: Option<Jet> = None;
        for l in 0..n {
            let sym = &(&dg[(i, j, l)] + &dg[(j, i, l)]) - &dg[(l, i, j)];
            let term = &ginv[(k, l)] * &sym;
            acc = Some(match acc {
                None => term,
                Some(a) => &a + &term,
            });
        }
        acc.unwrap().scale(0.5)
    })
}

/// Invert a symmetric matrix of jets via the value-part inverse and a
/// truncated Neumann series in the nilpotent remainder.
pub fn invert_jet_matrix(g: &Arr2<Jet>) -> std::result::Result<Arr2<Jet>, String> {
    let n = g.n();
    let order = g[(0, 0)].order();
    let dim = g[(0, 0)].dim();
    let space = jet_space(dim, order);
    let a0 = Arr2::from_fn(n, |i, j| g[(i, j)].value());
    let a0inv = invert_values(&a0)?;
    let a0inv_j = Arr2::from_fn(n, |i, j| Jet::constant(&space, a0inv[(i, j)]));
    if order == 0 {
        return Ok(a0inv_j);
    }
    // M = A0^{-1} (G - A0) has nilpotent entries.
    let nilp = Arr2::from_fn(n, |i, j| {
        let mut e = g[(i, j)].clone();
        e.set_raw_coeff(&vec![0u8; dim], 0.0);
        e
    });
    let m = mat_mul(&a0inv_j, &nilp);
    // (I + M)^{-1} = I - M + M^2 - M^3 (exact at truncation order <= 3).
    let mut series = Arr2::from_fn(n, |i, j| {
        let ident = if i == j { 1.0 } else { 0.0 };
        Jet::constant(&space, ident)
    });
    let mut power = m.clone();
    let mut sign = -1.0;
    for _ in 0..order {
        for i in 0..n {
            for j in 0..n {
                series[(i, j)] = &series[(i, j)] + &power[(i, j)].scale(sign);
            }
        }
        power = mat_mul(&power, &m);
        sign = -sign;
    }
    Ok(mat_mul(&series, &a0inv_j))
}

/// Determinant of a jet matrix: `det(A0) * exp(tr log(I + M))` with
/// `M = A0^{-1} (G - A0)` nilpotent, so the log truncates exactly.
pub fn det_jet_matrix(g: &Arr2<Jet>) -> std::result::Result<Jet, String> {
    let n = g.n();
    let order = g[(0, 0)].order();
    let dim = g[(0, 0)].dim();
    let space = jet_space(dim, order);
    let a0 = Arr2::from_fn(n, |i, j| g[(i, j)].value());
    let det0 = det_values(&a0);
    if det0.abs() < 1e-300 {
        return Err("singular matrix".into());
    }
    if order == 0 {
        return Ok(Jet::constant(&space, det0));
    }
    let a0inv = invert_values(&a0)?;
    let a0inv_j = Arr2::from_fn(n, |i, j| Jet::constant(&space, a0inv[(i, j)]));
    let nilp = Arr2::from_fn(n, |i, j| {
        let mut e = g[(i, j)].clone();
        e.set_raw_coeff(&vec![0u8; dim], 0.0);
        e
    });
    let m = mat_mul(&a0inv_j, &nilp);
    let mut log_det = Jet::constant(&space, 0.0);
    let mut power = m.clone();
    let mut sign = 1.0;
    for k in 1..=order {
        let mut tr = power[(0, 0)].clone();
        for i in 1..n {
            tr = &tr + &power[(i, i)];
        }
        log_det = &log_det + &tr.scale(sign / k as f64);
        power = mat_mul(&power, &m);
        sign = -sign;
    }
    Ok(log_det.exp().scale(det0))
}

fn det_values(a: &Arr2<f64>) -> f64 {
    let n = a.n();
    let mut m: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        det *= m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
        }
    }
    det
}

fn mat_mul(a: &Arr2<Jet>, b: &Arr2<Jet>) -> Arr2<Jet> {
    let n = a.n();
    Arr2::from_fn(n, |i, j| {
        let mut acc = &a[(i, 0)] * &b[(0, j)];
        for k in 1..n {
            acc = &acc + &(&a[(i, k)] * &b[(k, j)]);
        }
        acc
    })
}

fn invert_values(a: &Arr2<f64>) -> std::result::Result<Arr2<f64>, String> {
    let n = a.n();
    let mut m = vec![0.0; n * 2 * n];
    for i in 0..n {
        for j in 0..n {
            m[i * 2 * n + j] = a[(i, j)];
        }
        m[i * 2 * n + n + i] = 1.0;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * 2 * n + col].abs() > m[piv * 2 * n + col].abs() {
                piv = r;
            }
        }
        let pval = m[piv * 2 * n + col];
        if pval.abs() < 1e-14 {
            return Err(format!("singular metric (pivot {pval:.3e})"));
        }
        if piv != col {
            for c in 0..2 * n {
                m.swap(col * 2 * n + c, piv * 2 * n + c);
            }
        }
        let inv = 1.0 / m[col * 2 * n + col];
        for c in 0..2 * n {
            m[col * 2 * n + c] *= inv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * 2 * n + col];
            if f != 0.0 {
                for c in 0..2 * n {
                    m[r * 2 * n + c] -= f * m[col * 2 * n + c];
                }
            }
        }
    }
    Ok(Arr2::from_fn(n, |i, j| m[i * 2 * n + n + j]))
}

// ---------------------------------------------------------------------------
// Chart-calculus entry points.
// ---------------------------------------------------------------------------

/// Christoffel symbols `Gamma^k_{ij}` at a point.
pub fn christoffel(metric: &MetricField, x: &[f64]) -> Result<Arr3<f64>> {
    let mj = MetricJets::at(metric, x, 1)?;
    Ok(Arr3::from_fn(mj.dim(), |k, i, j| mj.gamma[(k, i, j)].value()))
}

/// Lowered Riemann tensor `R_{msuv}` at a point.
pub fn riemann(metric: &MetricField, x: &[f64]) -> Result<Arr4<f64>> {
    let mj = MetricJets::at(metric, x, 2)?;
    let r = mj.riemann_lowered();
    Ok(Arr4::from_fn(mj.dim(), |m, s, u, v| r[(m, s, u, v)].value()))
}

/// Ricci tensor at a point.
pub fn ricci(metric: &MetricField, x: &[f64]) -> Result<Arr2<f64>> {
    let mj = MetricJets::at(metric, x, 2)?;
    let r = mj.ricci();
    Ok(Arr2::from_fn(mj.dim(), |i, j| r[(i, j)].value()))
}

/// Scalar curvature at a point.
pub fn scalar_curv(metric: &MetricField, x: &[f64]) -> Result<f64> {
    let mj = MetricJets::at(metric, x, 2)?;
    Ok(mj.scalar().value())
}

/// Sup over the sample points of the max-abs component of
/// `Ric_g - (n-1) * lambda * g`.
pub fn einstein_residual(metric: &MetricField, lambda: f64, points: &[Vec<f64>]) -> Result<f64> {
    let n = metric.dim();
    let factor = (n as f64 - 1.0) * lambda;
    let mut sup: f64 = 0.0;
    for x in points {
        let mj = MetricJets::at(metric, x, 2)?;
        let ric = mj.ricci();
        let res = Arr2::from_fn(n, |i, j| ric[(i, j)].value() - factor * mj.g[(i, j)].value());
        sup = sup.max(max_abs2(&res));
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarField, SymTensorField};
    use crate::jet::Jet;

    fn euclidean(n: usize) -> MetricField {
        let t = SymTensorField::from_fn(n, |i, j| {
            ScalarField::constant(n, if i == j { 1.0 } else { 0.0 })
        });
        MetricField::new(t, Some(0.0))
    }

    #[test]
    fn flat_metric_has_zero_connection_and_curvature() {
        let g = euclidean(3);
        let x = [0.3, -0.7, 1.1];
        let gam = christoffel(&g, &x).unwrap();
        let rie = riemann(&g, &x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(gam[(i, j, k)], 0.0);
                    for l in 0..3 {
                        assert_eq!(rie[(i, j, k, l)], 0.0);
                    }
                }
            }
        }
        assert_eq!(scalar_curv(&g, &x).unwrap(), 0.0);
    }

    fn round_sphere2() -> MetricField {
        // Unit 2-sphere, chart (theta, phi).
        let t = SymTensorField::from_fn(2, |i, j| match (i, j) {
            (0, 0) => ScalarField::constant(2, 1.0),
            (1, 1) => ScalarField::exact(2, |x: &[Jet]| {
                let s = x[0].sin();
                &s * &s
            }),
            _ => ScalarField::constant(2, 0.0),
        });
        MetricField::new(t, Some(1.0))
    }

    #[test]
    fn sphere_christoffel_and_curvature() {
        let g = round_sphere2();
        let x = [std::f64::consts::FRAC_PI_3, 0.4];
        let gam = christoffel(&g, &x).unwrap();
        let expect = -x[0].sin() * x[0].cos();
        assert!((gam[(0, 1, 1)] - expect).abs() < 1e-13, "Gamma^theta_phiphi");
        assert!((expect + 0.4330127018922193).abs() < 1e-12);
        // Unit sphere: R = 2, Ric = g.
        assert!((scalar_curv(&g, &x).unwrap() - 2.0).abs() < 1e-12);
        let ric = ricci(&g, &x).unwrap();
        assert!((ric[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((ric[(1, 1)] - x[0].sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn riemann_symmetries_and_bianchi_on_sphere() {
        let g = round_sphere2();
        let x = [1.1, 2.0];
        let r = riemann(&g, &x).unwrap();
        let n = 2;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        assert!((r[(i, j, k, l)] + r[(j, i, k, l)]).abs() < 1e-12);
                        assert!((r[(i, j, k, l)] + r[(i, j, l, k)]).abs() < 1e-12);
                        assert!((r[(i, j, k, l)] - r[(k, l, i, j)]).abs() < 1e-12);
                        let bianchi = r[(i, j, k, l)] + r[(i, k, l, j)] + r[(i, l, j, k)];
                        assert!(bianchi.abs() < 1e-12);
                    }
                }
            }
        }
        // Ricci contraction convention: ricci_ij = g^{kl} R_{kilj}.
        let mj = MetricJets::at(&g, &x, 2).unwrap();
        let low = mj.riemann_lowered();
        let ric = ricci(&g, &x).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        s += mj.ginv[(k, l)].value() * low[(k, i, l, j)].value();
                    }
                }
                assert!((s - ric[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_metric_is_an_error() {
        let t = SymTensorField::from_fn(2, |i, j| {
            ScalarField::constant(2, if i == j { 0.0 } else { 0.0 })
        });
        let g = MetricField::new(t, None);
        assert!(matches!(
            christoffel(&g, &[0.0, 0.0]),
            Err(CoreError::DegenerateMetric { .. })
        ));
    }
}
