//! Trajectory planning for partially observed robots, comparing
//! observability-Gramian objectives against Kalman covariance-trace
//! objectives.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs: rollouts, Jacobians, Gramians, Riccati
//! propagation, the augmented-Lagrangian planner and the scenario
//! comparison. File formats and the command line live in the `obsplan`
//! companion crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod eval;
pub mod gramian;
pub mod linalg;
pub mod models;
pub mod planner;
pub mod riccati;
pub mod scenario;
pub mod trajectory;

pub use error::{Error, Result};
pub use linalg::{ControlVec, CovMatrix, Matrix, ObsVec, StateVec, Vector};
pub use trajectory::{rollout_nominal, LinearizationSequence, NominalTrajectory};
