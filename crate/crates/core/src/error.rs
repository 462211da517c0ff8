use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Two values living over free groups of different ranks were combined.
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u32, u32),

    /// A generator index was zero or out of range for the ambient rank.
    #[error("invalid generator index {index} for rank {rank}")]
    InvalidGenerator { index: i64, rank: u32 },

    /// A permutation action does not reach every point from the basepoint.
    #[error("action is not transitive; orbit of the basepoint: {orbit:?}")]
    NotTransitive { orbit: Vec<usize> },

    /// A supplied map on a finite set is not a bijection.
    #[error("not a permutation of {{0..{size}}}: {reason}")]
    NotAPermutation { size: usize, reason: String },

    /// A computation would exceed a configured size cap.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// An operation precondition was violated (reported distinctly from
    /// cap exhaustion).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The identity element was passed where a nontrivial element is required.
    #[error("the identity element has no boundary fixed points")]
    IdentityElement,

    /// A fixed-point iteration failed to stabilize within its iteration cap.
    #[error("cylinder-expansion iteration did not stabilize: {0}")]
    NoConvergence(String),

    /// Malformed input data (bad JSON payloads, inconsistent schedules, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
