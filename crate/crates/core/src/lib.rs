//! Double-robust representation learning for counterfactual prediction.
//!
//! The crate bundles the pieces needed to estimate average and individual
//! treatment effects from observational data with learned representations:
//!
//! - [`numerics`] — dense matrix helpers, stable log-sum-exp, seeded
//!   random streams, finite-difference gradients.
//! - [`ebal`] — entropy-balancing weight solvers (dual Newton, Fenchel
//!   mini-max, ATT variant, primal oracle) and a logistic MLE.
//! - [`repnet`] — a ReLU multi-layer perceptron with two linear outcome
//!   heads, trained jointly with interleaved balancing steps.
//! - [`estimators`] — double-robust, weighting-only, and outcome-only
//!   point estimators for ATE/ATT.
//! - [`data`] — synthetic high-dimensional benchmark generation, CSV
//!   ingestion, deterministic splits, 1-NN surrogate effects.
//! - [`eval`] — error metrics, policy risk, divergence diagnostics.
//! - [`baselines`] — OLS with interactions, k-NN regression, MMD.

pub mod baselines;
pub mod data;
pub mod ebal;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod numerics;
pub mod repnet;

pub use error::{Error, Result};
