//! Bound-envelope verification of the Osterwalder–Schrader positivity
//! conditions for the Φ⁴₄ Green's-function hierarchy in Euclidean momentum
//! space.
//!
//! Every Green's function is replaced by its proven sign times a lower or
//! upper magnitude bound, and the positivity inequalities are evaluated on
//! factorized radial test functions. Results are bound-envelope
//! verifications, never solution values.

pub mod config;
pub mod decompositions;
pub mod exec;
pub mod greens;
pub mod ospforms;
pub mod partitions;
pub mod verifier;

pub use config::{load_config, PhysicalParams, Provenance, RenormConstants};
pub use exec::Execution;
pub use greens::{EnvelopeEvaluator, EnvelopeMode, Momentum4, SplittingBounds};
pub use partitions::{OddProfile, TreeCounts};
