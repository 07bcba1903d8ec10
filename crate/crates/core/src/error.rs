use thiserror::Error;

#[derive(Debug, Error)]
pub enum PearlError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("class {class} has no training examples")]
    MissingClass { class: usize },
    #[error("candidate {candidate}, fold {fold}: {source}")]
    Fold {
        candidate: usize,
        fold: usize,
        #[source]
        source: Box<PearlError>,
    },
    #[error("oracle baseline needs labels")]
    OracleNeedsLabels,
    #[error("csv row {row}: {msg}")]
    Csv { row: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("suite aborted: {0}")]
    Suite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PearlError>;

/// Non-fatal conditions recorded on fitted artifacts.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Warning {
    /// Fewer usable components than requested.
    DimensionReduced { requested: usize, kept: usize },
    /// Ridge system at lambda = 0 was singular and was re-solved with a small penalty.
    RidgeRetried { lambda: f64 },
    /// Iterative fit stopped at its iteration cap.
    NotConverged { iterations: usize, residual: f64 },
    /// Backtracking could not find a decreasing step before the residual reached tolerance.
    LineSearchStalled { iterations: usize, residual: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::DimensionReduced { requested, kept } => {
                write!(f, "dimension reduced from {requested} to {kept}")
            }
            Warning::RidgeRetried { lambda } => {
                write!(f, "singular normal equations, retried with lambda={lambda}")
            }
            Warning::NotConverged { iterations, residual } => {
                write!(f, "not converged after {iterations} iterations (residual {residual:e})")
            }
            Warning::LineSearchStalled { iterations, residual } => {
                write!(f, "line search stalled at iteration {iterations} (residual {residual:e})")
            }
        }
    }
}
