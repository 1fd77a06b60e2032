//! Composite likelihood as logarithmic opinion pooling, and its super
//! composite generalization with hypothesis-dependent weights, on finite
//! hypothesis spaces.
//!
//! - [`pool`]: the log-linear pool / composite likelihood posterior.
//! - [`scl`]: super composite likelihood, its posterior and the PDF
//!   projection special case.
//! - [`weights`]: KL utilities and optimal weight selection.
//! - [`nuisance`]: composite evidence over a nuisance grid.
//! - [`oracle`]: exact generative models used as ground truth.

pub mod distribution;
pub mod error;
pub mod feature;
pub mod hypothesis;
pub mod nuisance;
pub mod oracle;
pub mod pool;
pub mod random;
pub mod scl;
pub mod weight;
pub mod weights;

pub use distribution::{
    kl_divergence, log_sum_exp, normalize_log, validate_simplex, Alphabet, FiniteDistribution,
};
pub use error::{Error, Result};
pub use feature::FeatureModel;
pub use hypothesis::HypothesisSpace;
pub use nuisance::NuisancePrior;
pub use oracle::{FeatureMap, GenerativeOracle, Sample};
pub use pool::{ClueValue, CluesObservation};
pub use weight::WeightMatrix;
pub use weights::{UtilityMatrix, WeightSelection};
