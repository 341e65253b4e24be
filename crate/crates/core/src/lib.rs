//! Multi-objective Monte-Carlo tree search over combinatorial chemical spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`pareto`]: dominance, Pareto fronts, utopia distance and objective transforms
//! * [`chem`]: building blocks and reaction templates, plus space reduction
//! * [`oracle`]: objective evaluation backends
//! * [`engine`]: the Pareto tree search and its report
//! * [`metrics`]: quality scores for a generated set
//! * [`bandit`]: flat bandit instances for checking the selection policy
//!
//! The numeric core is generic over [`Scalar`]; the aliases below fix it to `f64`,
//! which is what the search engine uses.

// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod chem;
pub mod engine;
pub mod metrics;
pub mod oracle;
pub mod pareto;
pub mod scalar;

pub use scalar::Scalar;

pub type Objectives = pareto::ObjectiveVector<f64>;
pub type Entry = metrics::GenerationEntry<f64>;
pub type Consistency = metrics::ParetoConsistency<f64>;
