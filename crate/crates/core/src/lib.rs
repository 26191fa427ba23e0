//! Greedy-like sparse recovery with RIP-based guarantees.
//!
//! * [`linalg`]: dictionaries, supports, restricted least squares.
//! * [`metrics`]: mutual coherence, restricted isometry constants, noise
//!   correlation.
//! * [`pursuit`]: Subspace Pursuit, CoSaMP, IHT, the oracle estimator and
//!   recurrence diagnostics.
//! * [`guarantees`]: closed-form constants, conditions and error bounds.
//! * [`experiment`]: seeded Monte-Carlo denoising sweeps.

// `!(x > 0.0)` checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod guarantees;
pub mod linalg;
pub mod metrics;
pub mod pursuit;

pub use error::{Error, Result};
pub use linalg::{Dictionary, Measurement, SparseSignal, SupportSet};
pub use pursuit::{Algorithm, PursuitConfig, PursuitResult};
