//! Linear-optical number-sum Bell detectors with imperfect zero-one photon
//! counters, and the teleportation-based manipulations built on them.
//!
//! Everything that depends on detector noise is carried as a truncated series
//! in δη = 1 − η and the dark count ν; [`oracle`] evaluates the same
//! quantities numerically for cross-checks.

pub mod cli;
pub mod detector;
pub mod error;
pub mod fock;
pub mod interferometer;
pub mod oracle;
pub mod poly;
pub mod sources;
pub mod teleport;

pub use error::{Error, Result};
pub use poly::{BivariatePoly, ExpansionOrder};
