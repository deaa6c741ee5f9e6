use thiserror::Error;

/// Errors shared by the chart calculus, boundary geometry, and the
/// Schwarzschild-family machinery.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("degenerate metric at {point:?}: {detail}")]
    DegenerateMetric { point: Vec<f64>, detail: String },

    #[error("point {point:?} outside chart domain: {detail}")]
    OutsideDomain { point: Vec<f64>, detail: String },

    #[error("field cannot supply derivatives of order {requested} (max {available})")]
    DerivativeOrder { requested: usize, available: usize },

    #[error("finite-difference stencil not evaluable: {0}")]
    Stencil(String),

    #[error("parameter violates {inequality}: {detail}")]
    InvalidParams { inequality: String, detail: String },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("internal consistency violated: {0}")]
    Inconsistency(String),

    #[error("boundary operator undefined in ambient dimension {0}")]
    UnsupportedDimension(usize),

    #[error("background is not Einstein to tolerance: residual {residual:.3e} > {tol:.3e}")]
    NotEinstein { residual: f64, tol: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
