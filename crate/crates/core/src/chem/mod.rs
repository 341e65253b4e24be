//! Building blocks, reaction templates and the products they derive.
//!
//! Slot matching is tag based: a block fits a slot when its tag set
//! intersects the slot's tag set. Products get a content digest id and the
//! bitwise OR of their reactants' fingerprints.

mod fingerprint;
pub mod io;
mod space;

pub use fingerprint::{tanimoto, Fingerprint, DEFAULT_WIDTH};
pub use space::{
    compatible, count_possible_products, derive_product, partially_compatible, product_id,
    reduce_space, BuildingBlock, ChemSpace, CombineRule, Product, ReactionTemplate,
    DEFAULT_PRODUCT_CAP, DEFAULT_THRESHOLD,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("fingerprint width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("invalid fingerprint: {0}")]
    Fingerprint(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("threshold {0} outside [0,1]")]
    Threshold(f64),
    #[error("blocks are not compatible with template {template}")]
    Incompatible { template: String },
    #[error("product count exceeded cap {cap}; at least {lower_bound} products")]
    Capacity { cap: u64, lower_bound: u64 },
    #[error("max_steps must be 1 or 2, got {0}")]
    Steps(usize),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("invalid {what} {id}: {reason}")]
    Invalid {
        what: &'static str,
        id: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for SpaceError {
    fn from(e: std::io::Error) -> Self {
        SpaceError::Io(e.to_string())
    }
}
