//! Desk-scale laboratory for stress-testing zero-noise-extrapolation benchmarks.
//!
//! The crate simulates small noisy Trotter circuits exactly as density
//! matrices, applies configurable digital ZNE (unitary folding plus
//! Richardson/polynomial/exponential extrapolation), and runs the full
//! inferential-statistics battery over repeated experiments: paired tests,
//! effect sizes, multiplicity corrections, bootstrap power, and
//! drift-severity metrics for longitudinal studies under time-varying noise.
//!
//! Everything is deterministic given a master seed; repetition seeds are
//! derived with a documented 64-bit mixing scheme (see [`seed`]).

pub mod circuit;
pub mod drift;
pub mod error;
pub mod noise;
pub mod report;
pub mod scenario;
pub mod seed;
pub mod sim;
pub mod stats;
pub mod sweep;
pub mod zne;

pub use error::{Error, Result};
