use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unknown filter `{0}`")]
    UnknownFilter(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(u32, u32),

    #[error("window half-width {d} is smaller than the invariant half-width {d_star}")]
    WindowTooSmall { d: i64, d_star: i64 },

    #[error("negative weight: minimum {min:e} on the grid")]
    NegativeWeight { min: f64 },

    #[error("orbit of root at angle {angle} leaves the root set without closing: {orbit:?}")]
    OrbitEscape { angle: f64, orbit: Vec<f64> },

    #[error("eigenvalue {lambda} does not satisfy lambda^{period} = 1")]
    EigenvalueMismatch { lambda: String, period: usize },

    #[error("eigenspace of {lambda} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        lambda: String,
        found: usize,
        expected: usize,
    },

    #[error("nu-normalization system for {lambda} is ill-conditioned (cond = {cond:e})")]
    IllConditioned { lambda: String, cond: f64 },

    #[error("not a fixed point: sup |Rh - h| = {residual:e}")]
    NotAFixedPoint { residual: f64 },

    #[error("fixed point is not constant on cycle {cycle} (spread {spread:e})")]
    NotCycleConstant { cycle: usize, spread: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),
}

impl Error {
    /// Short machine-readable name used in JSON error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::UnknownFilter(_) => "UnknownFilter",
            Error::InvalidParam(_) => "InvalidParam",
            Error::Parse { .. } => "ParseError",
            Error::Schema(_) => "SchemaError",
            Error::Io { .. } => "IoError",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::ScaleMismatch(..) => "ScaleMismatch",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::OrbitEscape { .. } => "OrbitEscape",
            Error::EigenvalueMismatch { .. } => "EigenvalueMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::NotAFixedPoint { .. } => "NotAFixedPoint",
            Error::NotCycleConstant { .. } => "NotCycleConstant",
            Error::NotConverged { .. } => "NotConverged",
            Error::GridMismatch(_) => "GridMismatch",
            Error::UnknownFunction(_) => "UnknownFunction",
        }
    }

    /// Input errors map to exit code 2, everything else to 1.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Schema(_)
                | Error::Io { .. }
                | Error::UnknownFilter(_)
                | Error::InvalidParam(_)
                | Error::UnknownFunction(_)
        )
    }
}
