use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("no regeneration: {visits} visit(s) to the atom/small set, {regenerations} regeneration(s)")]
    NoRegeneration { visits: usize, regenerations: usize },

    #[error("degenerate path: coordinate {coordinate} has zero spread, transition density undefined")]
    DegenerateDensity { coordinate: usize },

    #[error("no viable small set among {candidates} candidate(s)")]
    NoViableSmallSet { candidates: usize },

    #[error("not enough blocks: have {blocks}, need at least {needed}")]
    NotEnoughBlocks { blocks: usize, needed: usize },

    #[error("singular variance matrix")]
    SingularVariance,

    #[error("estimate did not converge after {iterations} iterations (best value {best_value})")]
    EstimateNotConverged {
        best: Vec<f64>,
        best_value: f64,
        iterations: usize,
    },

    #[error("confidence region is empty on the searched bounds")]
    EmptyRegion,

    #[error("zero degrees of freedom: moment dimension equals parameter dimension")]
    DegreesOfFreedomZero,

    #[error("order test inconclusive at k = {order}: only {blocks} blocks")]
    OrderTestInconclusive {
        order: usize,
        blocks: usize,
        partial: Vec<crate::regeneration::OrderStep>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
