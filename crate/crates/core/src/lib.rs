//! Sparse signal recovery from saturated (clipped) compressive measurements.
//!
//! Unsaturated rows enter a least-squares fit, saturated rows enter through a
//! linear sign-consistency loss, and the estimate lives in an L2 ball:
//!
//! ```text
//! minimize  f(x) + 1/(2 M1) ||Phi1 x - y1||^2 - gamma/M2 * s2^T (Phi2 x - y2)
//! s.t.      ||x||_2 <= C
//! ```
//!
//! The problem is solved by a two-block ADMM whose x-step is a cached linear
//! solve and whose z-step is a ball-constrained proximal operator for one of
//! the supported penalties (L1, L0, MCP, nonconvex sorted L1).
//!
//! Module map:
//! - [`model`]: observation model, partitioning, dataset validation and CSV storage.
//! - [`prox`]: proximal operators with and without the ball constraint.
//! - [`solver`]: ADMM loop, x-system factorization, rejection LASSO baseline.
//! - [`synth`]: synthetic benchmark generation.
//! - [`analysis`]: SNR / angular error metrics, lambda estimation, error bounds.
//! - [`harness`]: cross-validation, parameter calibration, sweeps and timing.

pub mod analysis;
pub mod config;
pub mod error;
pub mod harness;
pub mod model;
pub mod prox;
pub mod rng;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use model::{GroundTruth, SaturatedDataset};
pub use prox::Penalty;
pub use solver::{RecoveryResult, SolverConfig};
pub use synth::ExperimentSpec;
