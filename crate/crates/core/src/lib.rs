//! Absolute Trust reputation aggregation.
//!
//! * [`matrix`]: local trust matrices, incidence patterns, irreducibility.
//! * [`solvers`]: center point, second-moment and global-trust iterations.
//! * [`analysis`]: error-dynamics matrices, spectral radii, center-point
//!   properties and the large-error bound.
//! * [`simulator`]: in-process peer network running the iteration as a
//!   message-driven computation.
//! * [`golden`]: the reference 4x4 example and its published iteration tables.

pub mod analysis;
pub mod error;
pub mod golden;
pub mod io;
pub mod matrix;
pub mod simulator;
pub mod solvers;

pub use error::{Result, TrustError};
pub use matrix::{build_incidence, is_irreducible, IncidenceMatrix, LocalTrustMatrix, TrustVector};
pub use solvers::{
    center_point, eq1_residual, global_trust, global_trust_step, phi1_step, phi2_solve, phi2_step, InitialGuess,
    IterationTrace, SolveResult, SolverConfig,
};
