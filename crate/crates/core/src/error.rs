//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on function arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The balancing target lies outside (or on the boundary of) the convex
    /// hull of the group's representations, or the solver hit its iteration
    /// cap. Either way the dual multipliers diverge, which is the signature
    /// of poor overlap.
    #[error("infeasible-or-poor-overlap: balance constraints for the {group} group cannot be met")]
    InfeasibleOrPoorOverlap { group: &'static str },

    /// Logistic MLE diverged, i.e. the classes are (quasi-)separable.
    #[error("perfect separation: logistic MLE diverged (|lambda| exceeded {cap})")]
    Separation { cap: f64 },

    /// A minibatch contained only one treatment group.
    #[error("degenerate batch: only one treatment group present")]
    DegenerateBatch,

    /// Training produced a non-finite loss.
    #[error("training aborted at iteration {iteration}: {message}")]
    Training { iteration: usize, message: String },

    /// A metric needs ground-truth potential-outcome means that the dataset
    /// does not carry.
    #[error("missing ground truth: {0}")]
    MissingGroundTruth(String),

    /// CSV parse failure with a 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An estimator was handed weights solved for a different estimand.
    #[error("estimand mismatch: expected {expected}, got {got}")]
    EstimandMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// Function evaluation returned a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
