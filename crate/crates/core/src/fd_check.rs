//! The universal oracle: directional finite differences through one-parameter
//! families of metrics, with one Richardson extrapolation level and a
//! truncation-error report. Every analytic linearized operator in this crate
//! is validated against these difference quotients.

use crate::error::Result;
use crate::field::Arr2;

/// A derivative estimate plus the Richardson step used to judge it.
#[derive(Clone, Debug)]
pub struct FdEstimate<T> {
    pub value: T,
    /// Difference between the extrapolated value and the finest plain
    /// quotient; a proxy for the remaining truncation error.
    pub error_estimate: f64,
}

/// Default step for directional families; balanced so that the Richardson
/// pair lands well below 1e-9 truncation for order-one quantities.
pub const DEFAULT_STEP: f64 = 1e-3;

/// d/ds at s = 0 of a scalar-valued family, central differences plus one
/// Richardson level.
pub fn fd_directional_scalar(
    family: impl Fn(f64) -> Result<f64>,
    h0: f64,
) -> Result<FdEstimate<f64>> {
    let quot = |h: f64| -> Result<f64> { Ok((family(h)? - family(-h)?) / (2.0 * h)) };
    let d1 = quot(h0)?;
    let d2 = quot(h0 / 2.0)?;
    let value = (4.0 * d2 - d1) / 3.0;
    Ok(FdEstimate { value, error_estimate: (value - d2).abs() })
}

/// d/ds at s = 0 of a symmetric-tensor-valued family (componentwise), with
/// the error estimate taken in the max norm.
pub fn fd_directional_sym2(
    family: impl Fn(f64) -> Result<Arr2<f64>>,
    h0: f64,
) -> Result<FdEstimate<Arr2<f64>>> {
    let quot = |h: f64| -> Result<Arr2<f64>> {
        let p = family(h)?;
        let m = family(-h)?;
        Ok(Arr2::from_fn(p.n(), |i, j| (p[(i, j)] - m[(i, j)]) / (2.0 * h)))
    };
    let d1 = quot(h0)?;
    let d2 = quot(h0 / 2.0)?;
    let n = d1.n();
    let value = Arr2::from_fn(n, |i, j| (4.0 * d2[(i, j)] - d1[(i, j)]) / 3.0);
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            err = err.max((value[(i, j)] - d2[(i, j)]).abs());
        }
    }
    Ok(FdEstimate { value, error_estimate: err })
}

/// Max-norm relative deviation between two tensors, normalized by the max
/// component magnitude (floored at 1 to keep near-zero tensors meaningful).
pub fn rel_dev2(a: &Arr2<f64>, b: &Arr2<f64>) -> f64 {
    let n = a.n();
    let mut scale: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(a[(i, j)].abs()).max(b[(i, j)].abs());
            dev = dev.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    dev / scale.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::scalar_curv;
    use crate::metrics::{euclidean_cartesian, perturbed, scaled};

    #[test]
    fn scalar_curvature_derivative_vanishes_in_flat_space() {
        // Family g + s*g on Euclidean background: R' along the metric itself.
        let (_, g) = euclidean_cartesian(3, -1.0, 1.0);
        let x = vec![0.2, 0.1, -0.3];
        let est = fd_directional_scalar(
            |s| scalar_curv(&perturbed(&g, &g.tensor, s), &x),
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(est.value.abs() < 1e-10);
    }

    #[test]
    fn volume_element_derivative_of_dilation_family() {
        // det^(1/2) of (1-s)^2 * delta is (1-s)^n; d/ds at 0 is -n.
        let n = 4;
        let (_, g) = euclidean_cartesian(n, -1.0, 1.0);
        let x = vec![0.0; n];
        let est = fd_directional_scalar(
            |s| {
                let gs = scaled(&g, (1.0 - s) * (1.0 - s));
                let m = gs.tensor.value(&x);
                let mut det = 1.0;
                for i in 0..n {
                    det *= m[(i, i)];
                }
                Ok(det.sqrt())
            },
            DEFAULT_STEP,
        )
        .unwrap();
        assert!((est.value + n as f64).abs() < 1e-9, "got {}", est.value);
        // The reported estimate tracks the h^2 truncation of the plain
        // quotient, not the extrapolated value.
        assert!(est.error_estimate < 1e-5);
    }
}
