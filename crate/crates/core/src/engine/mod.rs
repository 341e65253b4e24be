//! Pareto Monte-Carlo tree search over a [`ChemSpace`](crate::chem::ChemSpace).
//!
//! Nodes are tuples of building blocks or reaction products. Expanding a
//! tuple creates one product child per template the full tuple satisfies
//! and one tuple child per block that keeps the tuple completable. Every
//! child is scored by the oracle when created; a tuple's vector is the
//! element-wise max of its blocks' vectors. Selection samples uniformly
//! from the first Pareto front of the children's PUCB vectors, a rollout
//! ends at a product, and the product vector (max-merged on the way up) is
//! added to every node on the path.

mod policy;
mod report;
mod search;

use thiserror::Error;

pub use policy::{pucb, SelectionPolicy};
pub use report::{read_report, ReportSummary, ReportedProduct, SearchReport};
pub use search::{
    run_scalarized, run_search, NodeId, NodeKind, RolloutOutcome, Search, SearchNode,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    Config(String),
    #[error("search space has no building blocks")]
    EmptySpace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub rollouts: usize,
    /// Exploration constant `C`.
    pub exploration: f64,
    /// Largest block tuple a node may hold.
    pub max_blocks: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            rollouts: 10_000,
            exploration: 1.0,
            max_blocks: 3,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn new(rollouts: usize, seed: u64) -> Self {
        Self {
            rollouts,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.rollouts == 0 {
            return Err(SearchError::Config("rollouts must be at least 1".into()));
        }
        if !(self.exploration > 0.0) || !self.exploration.is_finite() {
            return Err(SearchError::Config(
                "exploration constant must be positive".into(),
            ));
        }
        if !(2..=4).contains(&self.max_blocks) {
            return Err(SearchError::Config("max blocks must be in 2..=4".into()));
        }
        Ok(())
    }
}
