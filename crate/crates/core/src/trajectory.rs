//! Nominal trajectories and the Jacobians evaluated along them.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{ControlVec, Matrix, StateVec};
use crate::models::ProcessModel;

/// Noise-free state sequence `x_0..x_K` paired with the controls
/// `u_0..u_{K-1}` that produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalTrajectory {
    states: Vec<StateVec>,
    controls: Vec<ControlVec>,
}

impl NominalTrajectory {
    pub fn states(&self) -> &[StateVec] {
        &self.states
    }

    pub fn controls(&self) -> &[ControlVec] {
        &self.controls
    }

    /// Number of control steps `K`.
    pub fn horizon(&self) -> usize {
        self.controls.len()
    }

    pub fn initial(&self) -> &StateVec {
        &self.states[0]
    }

    pub fn terminal(&self) -> &StateVec {
        &self.states[self.states.len() - 1]
    }
}

/// Applies `f(x_t, u_t, 0)` for `t = 0..K-1` starting from `x0`.
pub fn rollout_nominal(process: &ProcessModel, x0: &StateVec, controls: &[ControlVec]) -> Result<NominalTrajectory> {
    if controls.is_empty() {
        return Err(Error::InvalidArgument("rollout needs at least one control".into()));
    }
    if !x0.is_finite() {
        return Err(Error::RolloutDivergence { step: 0 });
    }
    let noise = StateVec::zeros(process.state_dim());
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(x0.clone());
    for (t, u) in controls.iter().enumerate() {
        let next = process.step(&states[t], u, &noise)?;
        if !next.is_finite() {
            return Err(Error::RolloutDivergence { step: t + 1 });
        }
        states.push(next);
    }
    Ok(NominalTrajectory {
        states,
        controls: controls.to_vec(),
    })
}

/// Jacobians of the process and observation models along a nominal
/// trajectory.
///
/// `a`, `b`, `g` hold `A_t, B_t, G_t` for `t = 0..K-1`. `h` and `m` are
/// evaluated at every nominal state, so `h[t]` is `H_t` for `t = 0..K`;
/// the filter only consumes `t = 1..K` while the Gramian may include
/// `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationSequence {
    pub a: Vec<Matrix>,
    pub b: Vec<Matrix>,
    pub g: Vec<Matrix>,
    pub h: Vec<Matrix>,
    pub m: Vec<Matrix>,
}

impl LinearizationSequence {
    pub fn horizon(&self) -> usize {
        self.a.len()
    }

    pub fn state_dim(&self) -> usize {
        self.a.first().map_or(0, Matrix::nrows)
    }

    /// Checks lengths (`K` and `K+1`) and shapes for consistency.
    pub fn validate(&self) -> Result<()> {
        let k = self.horizon();
        if k == 0 {
            return Err(Error::InvalidArgument("empty linearization sequence".into()));
        }
        if self.b.len() != k || self.g.len() != k {
            return Err(Error::dim("linearization", k, self.b.len().min(self.g.len())));
        }
        if self.h.len() != k + 1 || self.m.len() != k + 1 {
            return Err(Error::dim("linearization observation steps", k + 1, self.h.len()));
        }
        let nx = self.state_dim();
        if self.a.iter().any(|a| a.shape() != (nx, nx))
            || self.b.iter().any(|b| b.nrows() != nx)
            || self.g.iter().any(|g| g.nrows() != nx)
        {
            return Err(Error::dim("linearization process Jacobians", nx, "inconsistent"));
        }
        for (h, m) in self.h.iter().zip(&self.m) {
            if h.ncols() != nx || m.shape() != (h.nrows(), h.nrows()) {
                return Err(Error::dim("linearization observation Jacobians", nx, h.ncols()));
            }
        }
        Ok(())
    }
}
