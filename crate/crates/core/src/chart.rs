//! Coordinate charts: boxes with per-coordinate flavor (interval, periodic
//! circle, polar angle) and an optional distinguished boundary level set.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordKind {
    /// Plain interval coordinate.
    Line,
    /// Periodic circle coordinate; `hi - lo` is the period.
    Periodic,
    /// Polar angle in `(0, pi)`; sample grids stay `cap` away from the poles.
    Polar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    /// Sign of the outward direction in the level coordinate.
    pub fn outward_sign(self) -> f64 {
        match self {
            Side::Lower => -1.0,
            Side::Upper => 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Coord {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub kind: CoordKind,
    /// Dimensionless pole offset for `Polar` coordinates (fraction of the
    /// interval kept away from each end when sampling).
    pub cap: f64,
}

impl Coord {
    pub fn line(name: &str, lo: f64, hi: f64) -> Coord {
        Coord { name: name.into(), lo, hi, kind: CoordKind::Line, cap: 0.0 }
    }

    pub fn periodic(name: &str, lo: f64, hi: f64) -> Coord {
        Coord { name: name.into(), lo, hi, kind: CoordKind::Periodic, cap: 0.0 }
    }

    pub fn polar(name: &str) -> Coord {
        Coord {
            name: name.into(),
            lo: 0.0,
            hi: std::f64::consts::PI,
            kind: CoordKind::Polar,
            cap: 0.05,
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// Interval actually used for sampling (poles trimmed).
    pub fn sample_range(&self) -> (f64, f64) {
        match self.kind {
            CoordKind::Polar => {
                let off = self.cap * self.len();
                (self.lo + off, self.hi - off)
            }
            _ => (self.lo, self.hi),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub coord: usize,
    pub level: f64,
    pub side: Side,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chart {
    coords: Vec<Coord>,
    boundary: Option<BoundarySpec>,
}

impl Chart {
    pub fn new(coords: Vec<Coord>, boundary: Option<BoundarySpec>) -> Result<Chart> {
        if coords.len() < 2 {
            return Err(CoreError::InvalidChart(format!(
                "dimension {} < 2",
                coords.len()
            )));
        }
        for c in &coords {
            if !(c.lo < c.hi) {
                return Err(CoreError::InvalidChart(format!(
                    "coordinate {} has empty interval [{}, {}]",
                    c.name, c.lo, c.hi
                )));
            }
        }
        if let Some(b) = &boundary {
            if b.coord >= coords.len() {
                return Err(CoreError::InvalidChart("boundary coordinate out of range".into()));
            }
            let c = &coords[b.coord];
            if b.level < c.lo || b.level > c.hi {
                return Err(CoreError::InvalidChart(format!(
                    "boundary level {} outside [{}, {}]",
                    b.level, c.lo, c.hi
                )));
            }
        }
        Ok(Chart { coords, boundary })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Coord {
        &self.coords[i]
    }

    pub fn boundary(&self) -> Option<&BoundarySpec> {
        self.boundary.as_ref()
    }

    pub fn with_boundary(mut self, spec: BoundarySpec) -> Result<Chart> {
        let coords = std::mem::take(&mut self.coords);
        Chart::new(coords, Some(spec))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.coords).all(|(v, c)| *v >= c.lo - 1e-12 && *v <= c.hi + 1e-12)
    }

    /// Chart of the distinguished boundary level set: the level coordinate is
    /// dropped, the rest keep their flavor.
    pub fn boundary_chart(&self) -> Result<Chart> {
        let b = self
            .boundary
            .ok_or_else(|| CoreError::InvalidChart("chart has no boundary level set".into()))?;
        let coords: Vec<Coord> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != b.coord)
            .map(|(_, c)| c.clone())
            .collect();
        Chart::new(coords, None)
    }

    /// Insert the boundary level back into a point of the boundary chart.
    pub fn embed_boundary_point(&self, sigma_point: &[f64]) -> Vec<f64> {
        let b = self.boundary.expect("chart has no boundary level set");
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(&sigma_point[..b.coord]);
        x.push(b.level);
        x.extend_from_slice(&sigma_point[b.coord..]);
        x
    }

    /// Tangential coordinate indices of the boundary (ambient numbering).
    pub fn tangential_indices(&self) -> Vec<usize> {
        let b = self.boundary.expect("chart has no boundary level set");
        (0..self.dim()).filter(|i| *i != b.coord).collect()
    }

    /// Uniform tensor-product sample grid, `counts[i]` points per coordinate.
    /// Counts of 1 pin the coordinate at the middle of its range. Polar caps
    /// are respected.
    pub fn sample_grid(&self, counts: &[usize]) -> Vec<Vec<f64>> {
        assert_eq!(counts.len(), self.dim());
        let axes: Vec<Vec<f64>> = self
            .coords
            .iter()
            .zip(counts)
            .map(|(c, &m)| {
                let (lo, hi) = c.sample_range();
                if m <= 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    // Half-cell offset keeps nodes off interval ends.
                    let hstep = (hi - lo) / m as f64;
                    (0..m).map(|k| lo + (k as f64 + 0.5) * hstep).collect()
                }
            })
            .collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim()];
        for _ in 0..total {
            out.push(idx.iter().enumerate().map(|(i, &k)| axes[i][k]).collect());
            for i in (0..self.dim()).rev() {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
        out
    }

    /// Deterministic pseudo-random interior points (pole caps respected).
    pub fn sample_random(&self, count: usize, rng: &mut impl rand::Rng) -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| {
                self.coords
                    .iter()
                    .map(|c| {
                        let (lo, hi) = c.sample_range();
                        // Shrink slightly so FD stencils stay inside.
                        let margin = 0.02 * (hi - lo);
                        rng.gen_range(lo + margin..hi - margin)
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_dimension_and_bad_level() {
        assert!(Chart::new(vec![Coord::line("x", 0.0, 1.0)], None).is_err());
        let coords = vec![Coord::line("r", 0.0, 1.0), Coord::polar("theta")];
        let bad = BoundarySpec { coord: 0, level: 2.0, side: Side::Upper };
        assert!(Chart::new(coords, Some(bad)).is_err());
    }

    #[test]
    fn boundary_chart_drops_level_coordinate() {
        let coords = vec![
            Coord::line("r", 0.0, 1.0),
            Coord::polar("theta"),
            Coord::periodic("phi", 0.0, std::f64::consts::TAU),
        ];
        let spec = BoundarySpec { coord: 0, level: 1.0, side: Side::Upper };
        let chart = Chart::new(coords, Some(spec)).unwrap();
        let sigma = chart.boundary_chart().unwrap();
        assert_eq!(sigma.dim(), 2);
        assert_eq!(sigma.coord(0).name, "theta");
        let p = chart.embed_boundary_point(&[1.0, 2.0]);
        assert_eq!(p, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn sample_grid_avoids_poles() {
        let coords = vec![Coord::line("r", 0.5, 1.0), Coord::polar("theta")];
        let chart = Chart::new(coords, None).unwrap();
        for p in chart.sample_grid(&[3, 7]) {
            assert!(p[1] > 0.05 && p[1] < std::f64::consts::PI - 0.05);
        }
    }
}
