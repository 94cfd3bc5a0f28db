//! Error type shared across the crate.

/// Errors produced by sieving, threshold evaluation, and the statistics sweeps.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain violation: {0}")]
    Domain(String),

    /// An argument violates a structural precondition (ordering, ranges, grammar).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A requested range endpoint exceeds the global sieving ceiling.
    #[error("range ceiling exceeded: {requested} > {ceiling}")]
    RangeCeiling { requested: u64, ceiling: u64 },

    /// Successor search ran past its extension budget without finding an element.
    #[error("extension ceiling exhausted searching for a successor past {from}")]
    ExtensionExhausted { from: u64 },

    /// The requested relative error cannot be met by any supported truncation prime.
    #[error("relative error target {target:e} unreachable at truncation prime {p_max}")]
    TargetUnreachable { target: f64, p_max: u64 },

    /// The operation requires an admissible tuple.
    #[error("inadmissible tuple: {0}")]
    Inadmissible(String),

    /// Integer overflow in an exact computation.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Adaptive-family sweeps depend on a running sum and must run on one thread.
    #[error("adaptive threshold sweeps are sequential; rerun with threads = 1")]
    AdaptiveNeedsSequential,
}

pub type Result<T> = std::result::Result<T, Error>;
