use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("{what} index {index} out of range 0..{len}")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },

    #[error("inconsistent observations: {0}")]
    InconsistentObservations(String),

    #[error("empty feasible set: {0}")]
    EmptyFeasibleSet(String),

    #[error("state grid too coarse: {mass:.3e} of the mass reaches the grid boundary at t={t}")]
    GridTooCoarse { t: usize, mass: f64 },

    #[error("invalid scenario wiring: {0}")]
    Wiring(String),

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("history tree would exceed {limit} nodes")]
    TreeTooLarge { limit: usize },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }

    /// Whether the failure is numerical rather than a malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InconsistentObservations(_) | Error::GridTooCoarse { .. } | Error::TreeTooLarge { .. }
        )
    }

    /// Short stable identifier for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InconsistentObservations(_) => "inconsistent_observations",
            Error::EmptyFeasibleSet(_) => "empty_feasible_set",
            Error::GridTooCoarse { .. } => "grid_too_coarse",
            Error::Wiring(_) => "scenario_wiring",
            Error::UnknownAxis(_) => "unknown_axis",
            Error::TreeTooLarge { .. } => "tree_too_large",
        }
    }
}
