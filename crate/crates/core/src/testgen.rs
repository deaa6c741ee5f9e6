//! Seeded generators for test fields: random polynomial tensors, compactly
//! supported bumps, globally smooth tensors pushed through the spherical
//! coordinate map, and the two kernel-generator families (boundary-fixing
//! vector fields and sphere conformal Killing extensions).

use crate::field::{Arr2, ScalarField, SymTensorField, VectorField};
use crate::geometry::invert_jet_matrix;
use crate::jet::Jet;
use rand::Rng;

/// Dense polynomial in `dim` variables: list of (exponents, coefficient).
#[derive(Clone, Debug)]
pub struct Poly {
    pub dim: usize,
    pub terms: Vec<(Vec<u8>, f64)>,
}

impl Poly {
    /// All monomials of total degree <= 2 with coefficients drawn uniformly
    /// from [-1, 1].
    pub fn random_deg2(dim: usize, rng: &mut impl Rng) -> Poly {
        let mut terms = vec![(vec![0u8; dim], rng.gen_range(-1.0..1.0))];
        for i in 0..dim {
            let mut e = vec![0u8; dim];
            e[i] = 1;
            terms.push((e, rng.gen_range(-1.0..1.0)));
        }
        for i in 0..dim {
            for j in i..dim {
                let mut e = vec![0u8; dim];
                e[i] += 1;
                e[j] += 1;
                terms.push((e, rng.gen_range(-1.0..1.0)));
            }
        }
        Poly { dim, terms }
    }

    pub fn eval_jets(&self, x: &[Jet]) -> Jet {
        let mut acc = Jet::constant(x[0].space(), 0.0);
        for (exps, coeff) in &self.terms {
            let mut term = Jet::constant(x[0].space(), *coeff);
            for (i, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    term = &term * &x[i];
                }
            }
            acc = &acc + &term;
        }
        acc
    }

    pub fn field(&self) -> ScalarField {
        let p = self.clone();
        ScalarField::exact(self.dim, move |x| p.eval_jets(x))
    }
}

/// Random degree-2 polynomial scalar field in chart coordinates.
pub fn random_poly_scalar(dim: usize, rng: &mut impl Rng) -> ScalarField {
    Poly::random_deg2(dim, rng).field()
}

/// Random symmetric tensor with degree-2 polynomial components in chart
/// coordinates (for pointwise operator checks).
pub fn random_poly_sym2(dim: usize, rng: &mut impl Rng) -> SymTensorField {
    let polys: Vec<Poly> =
        (0..dim * (dim + 1) / 2).map(|_| Poly::random_deg2(dim, rng)).collect();
    let mut iter = polys.into_iter();
    let mut grid = vec![vec![None; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            grid[i][j] = Some(iter.next().unwrap());
        }
    }
    SymTensorField::from_fn(dim, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        grid[a][b].clone().unwrap().field()
    })
}

/// Random polynomial vector field in chart coordinates.
pub fn random_poly_vector(dim: usize, rng: &mut impl Rng) -> VectorField {
    VectorField::new((0..dim).map(|_| random_poly_scalar(dim, rng)).collect())
}

// ---------------------------------------------------------------------------
// Bumps.
// ---------------------------------------------------------------------------

/// `exp(1 - 1/(1 - u^2))` for |u| < 1, identically zero outside; smooth with
/// all derivatives vanishing at |u| = 1.
pub fn bump_jet(u: &Jet) -> Jet {
    if u.value().abs() >= 1.0 {
        return Jet::constant(u.space(), 0.0);
    }
    let one_minus = -(u * u) + 1.0;
    (-one_minus.recip() + 1.0).exp()
}

/// Bump in one coordinate, rescaled to vanish (to all orders) at `lo` and
/// `hi`; equals 1 at the midpoint.
pub fn interval_bump(dim: usize, slot: usize, lo: f64, hi: f64) -> ScalarField {
    ScalarField::exact(dim, move |x: &[Jet]| {
        let u = (x[slot].scale(2.0) - (lo + hi)).scale(1.0 / (hi - lo));
        bump_jet(&u)
    })
}

/// Radially symmetric bump on a ball chart (slot 0 = radius): smooth across
/// the origin, vanishing to all orders at `radius`.
pub fn ball_bump(dim: usize, radius: f64) -> ScalarField {
    ScalarField::exact(dim, move |x: &[Jet]| {
        let u = x[0].scale(1.0 / radius);
        bump_jet(&u)
    })
}

/// Product bump over every coordinate of a Cartesian box chart.
pub fn box_bump(dim: usize, lo: f64, hi: f64) -> ScalarField {
    ScalarField::exact(dim, move |x: &[Jet]| {
        let mut acc = Jet::constant(x[0].space(), 1.0);
        for xi in x {
            let u = (xi.scale(2.0) - (lo + hi)).scale(1.0 / (hi - lo));
            acc = &acc * &bump_jet(&u);
        }
        acc
    })
}

/// Multiply every component of a tensor by a scalar cutoff.
pub fn modulate_sym2(t: &SymTensorField, cutoff: &ScalarField) -> SymTensorField {
    let dim = t.dim();
    SymTensorField::from_fn(dim, |i, j| {
        let c = t.comp(i, j).clone();
        let b = cutoff.clone();
        let penalty = c.penalty().max(b.penalty());
        ScalarField::exact(dim, move |x| &c.jet_from(x) * &b.jet_from(x)).with_penalty(penalty)
    })
}

/// Multiply every component of a vector field by a scalar cutoff.
pub fn modulate_vector(v: &VectorField, cutoff: &ScalarField) -> VectorField {
    let dim = v.dim();
    VectorField::from_fn(dim, |i| {
        let c = v.comp(i).clone();
        let b = cutoff.clone();
        let penalty = c.penalty().max(b.penalty());
        ScalarField::exact(dim, move |x| &c.jet_from(x) * &b.jet_from(x)).with_penalty(penalty)
    })
}

// ---------------------------------------------------------------------------
// The spherical coordinate map with closed-form Jacobian (no jet-order loss).
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fact {
    Sin(usize),
    Cos(usize),
}

/// Map from radial spherical chart `(r, theta_1, ..., theta_{n-2}, phi)` to
/// Cartesian coordinates on R^n, with the Jacobian assembled from explicit
/// trigonometric products so no jet order is consumed.
pub struct SphericalMap {
    n: usize,
    factors: Vec<Vec<Fact>>,
}

impl SphericalMap {
    pub fn new(n: usize) -> SphericalMap {
        assert!(n >= 2);
        let mut factors = Vec::with_capacity(n);
        for i in 0..n {
            let mut f: Vec<Fact> = (1..=i).map(Fact::Sin).collect();
            if i + 1 <= n - 1 {
                f.push(Fact::Cos(i + 1));
            }
            factors.push(f);
        }
        SphericalMap { n, factors }
    }

    fn eval_fact(x: &[Jet], f: Fact) -> Jet {
        match f {
            Fact::Sin(s) => x[s].sin(),
            Fact::Cos(s) => x[s].cos(),
        }
    }

    fn unit(&self, x: &[Jet], i: usize) -> Jet {
        let mut acc = Jet::constant(x[0].space(), 1.0);
        for &f in &self.factors[i] {
            acc = &acc * &Self::eval_fact(x, f);
        }
        acc
    }

    /// Derivative of the unit-sphere factor with respect to angle slot `c`.
    fn unit_deriv(&self, x: &[Jet], i: usize, c: usize) -> Jet {
        let mut acc = Jet::constant(x[0].space(), 0.0);
        for (pos, &f) in self.factors[i].iter().enumerate() {
            let slot = match f {
                Fact::Sin(s) | Fact::Cos(s) => s,
            };
            if slot != c {
                continue;
            }
            let mut term = Jet::constant(x[0].space(), 1.0);
            for (q, &g) in self.factors[i].iter().enumerate() {
                let factor = if q == pos {
                    match g {
                        Fact::Sin(s) => x[s].cos(),
                        Fact::Cos(s) => -x[s].sin(),
                    }
                } else {
                    Self::eval_fact(x, g)
                };
                term = &term * &factor;
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Cartesian coordinates of a chart point (as jets).
    pub fn coords(&self, x: &[Jet]) -> Vec<Jet> {
        (0..self.n).map(|i| &x[0] * &self.unit(x, i)).collect()
    }

    /// Jacobian `J[(i, a)] = d x^i / d chart^a`, same jet order as the input.
    pub fn jacobian(&self, x: &[Jet]) -> Arr2<Jet> {
        Arr2::from_fn(self.n, |i, a| {
            if a == 0 {
                self.unit(x, i)
            } else {
                &x[0] * &self.unit_deriv(x, i, a)
            }
        })
    }
}

/// Symmetric tensor with Cartesian polynomial components pulled back to the
/// spherical chart: `h_ab = J^i_a J^j_b H_ij(Phi(x))`. Globally smooth on the
/// ball, so curvature pairings against it have smooth integrands.
pub fn cartesian_sym2_on_ball(n: usize, rng: &mut impl Rng) -> SymTensorField {
    let map = std::sync::Arc::new(SphericalMap::new(n));
    let comps: Vec<Poly> = (0..n * (n + 1) / 2).map(|_| Poly::random_deg2(n, rng)).collect();
    let comps = std::sync::Arc::new(comps);
    let tri = move |i: usize, j: usize| -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * n - i * (i + 1) / 2 + j
    };
    SymTensorField::from_fn(n, move |a, b| {
        let map = map.clone();
        let comps = comps.clone();
        ScalarField::exact(n, move |x: &[Jet]| {
            let cart = map.coords(x);
            let jac = map.jacobian(x);
            let mut acc = Jet::constant(x[0].space(), 0.0);
            for i in 0..n {
                for j in 0..n {
                    let h_ij = comps[tri(i, j)].eval_jets(&cart);
                    acc = &acc + &(&(&jac[(i, a)] * &jac[(j, b)]) * &h_ij);
                }
            }
            acc
        })
    })
}

/// Vector field with Cartesian polynomial components pulled back to the
/// spherical chart: `X^a = (J^{-1})^a_i V^i(Phi(x))`.
pub fn cartesian_vector_on_ball(n: usize, rng: &mut impl Rng) -> VectorField {
    let map = std::sync::Arc::new(SphericalMap::new(n));
    let comps: Vec<Poly> = (0..n).map(|_| Poly::random_deg2(n, rng)).collect();
    let comps = std::sync::Arc::new(comps);
    VectorField::from_fn(n, move |a| {
        let map = map.clone();
        let comps = comps.clone();
        ScalarField::exact(n, move |x: &[Jet]| {
            let cart = map.coords(x);
            let jac = map.jacobian(x);
            let jinv = invert_jet_matrix(&jac).expect("spherical Jacobian invertible off poles");
            let mut acc = Jet::constant(x[0].space(), 0.0);
            for i in 0..n {
                acc = &acc + &(&jinv[(a, i)] * &comps[i].eval_jets(&cart));
            }
            acc
        })
    })
}

// ---------------------------------------------------------------------------
// Kernel generators.
// ---------------------------------------------------------------------------

/// Vector field vanishing (to all orders) on the boundary sphere of a ball
/// chart of the given radius: a smooth Cartesian polynomial field modulated
/// by the radial bump.
pub fn boundary_fixing_vector_ball(n: usize, radius: f64, rng: &mut impl Rng) -> VectorField {
    let raw = cartesian_vector_on_ball(n, rng);
    modulate_vector(&raw, &ball_bump(n, radius))
}

/// The tangential part of a Cartesian coordinate vector on the boundary
/// sphere of a ball chart, extended radially constant: the conformal Killing
/// generator `Z = -sin(theta_1) d_theta1 / radius` (axis variant), plus an
/// optional radial taper selected by `taper`.
///
/// With `taper = None` the extension is radially constant; with
/// `taper = Some(p)` the field is multiplied by `(r/radius)^p`, which leaves
/// the boundary value (and hence all kernel residuals) unchanged.
pub fn conformal_killing_extension(n: usize, radius: f64, taper: Option<i32>) -> VectorField {
    VectorField::from_fn(n, move |a| {
        if a == 1 {
            ScalarField::exact(n, move |x: &[Jet]| {
                let z = -x[1].sin().scale(1.0 / radius);
                match taper {
                    None => z,
                    Some(p) => &z * &x[0].scale(1.0 / radius).powi(p),
                }
            })
        } else {
            ScalarField::constant(n, 0.0)
        }
    })
}

/// The divergence of the conformal Killing generator on the unit round
/// sphere: `div_Sigma Z = -(n-1) cos(theta_1) / radius^2`-style first
/// harmonic; used to confirm that trace terms are genuinely nonzero.
pub fn first_harmonic(sigma_dim: usize) -> ScalarField {
    ScalarField::exact(sigma_dim, |x: &[Jet]| x[0].cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{jet_space, Jet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spherical_map_round_trip() {
        let map = SphericalMap::new(3);
        let space = jet_space(3, 1);
        let x = Jet::variables(&space, &[2.0, 1.1, 0.7]);
        let cart = map.coords(&x);
        let r2: f64 = cart.iter().map(|c| c.value() * c.value()).sum();
        assert!((r2 - 4.0).abs() < 1e-12);
        // x0 = r cos(theta)
        assert!((cart[0].value() - 2.0 * (1.1f64).cos()).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_jet_derivatives() {
        // Compare the closed-form Jacobian against deriv() of the coords.
        let map = SphericalMap::new(4);
        let space = jet_space(4, 2);
        let x = Jet::variables(&space, &[1.5, 0.9, 1.2, 0.4]);
        let cart = map.coords(&x);
        let jac = map.jacobian(&x);
        for i in 0..4 {
            for a in 0..4 {
                let via_deriv = cart[i].deriv(a).value();
                assert!(
                    (jac[(i, a)].value() - via_deriv).abs() < 1e-12,
                    "J[{i}{a}]"
                );
            }
        }
    }

    #[test]
    fn bump_vanishes_outside_and_is_positive_inside() {
        let space = jet_space(1, 2);
        let inside = bump_jet(&Jet::variable(&space, 0.3, 0));
        assert!(inside.value() > 0.0);
        let outside = bump_jet(&Jet::variable(&space, 1.2, 0));
        assert_eq!(outside.value(), 0.0);
        assert_eq!(outside.partial(&[1]), 0.0);
    }

    #[test]
    fn boundary_fixing_vector_vanishes_at_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = boundary_fixing_vector_ball(3, 1.0, &mut rng);
        let v = x.value(&[1.0, 0.8, 0.3]);
        assert!(v.iter().all(|c| c.abs() < 1e-300));
        let v_in = x.value(&[0.5, 0.8, 0.3]);
        assert!(v_in.iter().any(|c| c.abs() > 1e-6));
    }
}
