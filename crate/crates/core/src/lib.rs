//! Analysis of tangles of bipartitions of a finite ground set.
//!
//! A separation splits the ground set in two; a tangle orients every
//! separation of a system so that any three chosen sides share a point.
//! This crate provides:
//!
//! - core types for ground sets, separation systems and tangles, with
//!   consistency checking and brute-force tangle enumeration ([`tangle`]);
//! - order functions, submodularity checks, `S_k` restriction, the
//!   extension of a tangle to all separations, and fake-tangle detection
//!   ([`order`]);
//! - covers, witnessing sets (exact, greedy, and the inductive
//!   construction), intersection chains and the associated size bounds
//!   ([`witness`]);
//! - reliability of sets and functions, guiding/dual-witness certificates
//!   via LP duality, maximum reliability, and a randomized guiding-set
//!   sampler ([`guide`]);
//! - a self-contained primal/dual simplex solver in exact rational and
//!   floating arithmetic ([`lp`]);
//! - generators for the standard worked instances used as fixtures
//!   ([`generators`]) and a JSON instance format ([`instance`]).
//!
//! All types are immutable after construction and safe to share across
//! threads; operations are pure functions of their inputs.

pub mod generators;
pub mod guide;
pub mod instance;
pub mod lp;
pub mod order;
pub mod point_set;
pub mod tangle;
pub mod witness;

pub use point_set::PointSet;
pub use tangle::{GroundSet, SeparationSystem, Tangle};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("separation side is empty or the full ground set")]
    TrivialSeparation,
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("operands belong to different ground sets ({left} vs {right} points)")]
    GroundMismatch { left: usize, right: usize },
    #[error("{what}: {value} exceeds limit {limit}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("orientation is not a tangle: big sides {0:?} have empty intersection")]
    NotATangle(Vec<usize>),
    #[error("order function is not submodular (violated at a side pair)")]
    OrderNotSubmodular,
    #[error("input is not a k-tangle for k = {k}: {reason}")]
    NotKTangle { k: usize, reason: String },
    #[error("set must be nonempty")]
    EmptySet,
    #[error("weights are not normalized: {0}")]
    NotNormalized(String),
    #[error("function is not guiding: reliability must exceed 1/2")]
    NotGuiding,
    #[error("linear program failure: {0}")]
    LpFailure(String),
    #[error("numerical instability in float mode; retry in rational mode")]
    NumericalInstability,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("orientation length {got} does not match separation count {want}")]
    OrientationLength { got: usize, want: usize },
    #[error("order values missing or of wrong length")]
    MissingOrders,
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
