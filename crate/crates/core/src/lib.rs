//! Numerical workbench for Einstein metrics on compact charts with boundary:
//! exact pointwise tensor calculus, linearized curvature operators with
//! finite-difference oracles, boundary geometry, integral identity checks,
//! and the full Schwarzschild-family boundary analysis.

pub mod chart;
pub mod error;
pub mod fd_check;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod boundary;
pub mod linops;
pub mod metrics;
pub mod quadrature;
pub mod schwarzschild;
pub mod series;
pub mod testgen;

pub use chart::{BoundarySpec, Chart, Coord, CoordKind, Side};
pub use error::{CoreError, Result};
pub use field::{Arr2, Arr3, Arr4, DerivativeMode, MetricField, ScalarField, SymTensorField, VectorField};
pub use jet::{jet_space, Jet, JetSpace};
