//! Complete planning problem instances.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gramian::GramianOptions;
use crate::linalg::{CovMatrix, Matrix, StateVec};
use crate::models::{ObservationModel, ProcessModel};

/// Sensor noise variance: a scalar shared by every measurement component,
/// or a full covariance over the measurement vector.
#[derive(Debug, Clone, PartialEq)]
pub enum SensorNoise {
    Scalar(f64),
    Matrix(CovMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub process: ProcessModel,
    pub observation: ObservationModel,
    /// Prior covariance `Σ_{x0}`.
    pub sigma_x0: CovMatrix,
    /// Process noise covariance `Σ_ω`.
    pub sigma_w: CovMatrix,
    pub sigma_nu: SensorNoise,
    /// Initial estimate `x̂_0`.
    pub x0: StateVec,
    pub goal: StateVec,
    /// Goal ball radius.
    pub r_g: f64,
    /// Per-step control norm bound.
    pub r_u: f64,
    pub horizon: usize,
    /// Control effort weight `W^u`.
    pub control_weight: Matrix,
    /// Waypoints of the piecewise-linear initial path.
    pub waypoints: Vec<[f64; 2]>,
    pub gramian: GramianOptions,
}

impl ScenarioConfig {
    /// `Σ_ν` as a matrix over the measurement vector.
    pub fn sigma_nu_matrix(&self) -> Result<CovMatrix> {
        let nz = self.observation.obs_dim();
        match &self.sigma_nu {
            SensorNoise::Scalar(s) => CovMatrix::isotropic(nz, *s),
            SensorNoise::Matrix(m) => Ok(m.clone()),
        }
    }

    /// Checks every invariant, reporting the first offending field.
    pub fn validate(&self) -> Result<()> {
        let nx = self.process.state_dim();
        let nu = self.process.control_dim();
        let nz = self.observation.obs_dim();
        if self.horizon < 1 {
            return Err(Error::field("horizon", "must be at least 1"));
        }
        for (field, value) in [("r_g", self.r_g), ("r_u", self.r_u)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::field(field, format!("must be positive (got {value})")));
            }
        }
        match &self.sigma_nu {
            SensorNoise::Scalar(s) if !s.is_finite() || *s <= 0.0 => {
                return Err(Error::field("sigma_nu", format!("must be positive (got {s})")));
            }
            SensorNoise::Matrix(m) => {
                if m.dim() != nz {
                    return Err(Error::field("sigma_nu", format!("must be {nz}x{nz}")));
                }
                if m.matrix().cholesky().is_err() {
                    return Err(Error::field("sigma_nu", "must be positive definite"));
                }
            }
            _ => {}
        }
        if self.sigma_x0.dim() != nx {
            return Err(Error::field("sigma_x0", format!("must be {nx}x{nx}")));
        }
        if self.sigma_w.dim() != nx {
            return Err(Error::field("sigma_w", format!("must be {nx}x{nx}")));
        }
        if self.control_weight.shape() != (nu, nu) {
            return Err(Error::field("control_weight", format!("must be {nu}x{nu}")));
        }
        if CovMatrix::new(self.control_weight.clone()).is_err() {
            return Err(Error::field(
                "control_weight",
                "must be symmetric positive semidefinite",
            ));
        }
        for (field, v) in [("x0", &self.x0), ("goal", &self.goal)] {
            if v.len() != nx {
                return Err(Error::field(field, format!("must have {nx} entries")));
            }
            if !v.is_finite() {
                return Err(Error::field(field, "must be finite"));
            }
        }
        if self.waypoints.len() < 2 {
            return Err(Error::field("waypoints", "need at least two points"));
        }
        if self.waypoints.len() - 1 > self.horizon {
            return Err(Error::field("waypoints", "more segments than horizon steps"));
        }
        if self.waypoints.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::field("waypoints", "must be finite"));
        }
        Ok(())
    }
}
