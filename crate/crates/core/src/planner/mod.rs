//! Trajectory optimization over the nominal control sequence.
//!
//! Two objectives share the same constraint set (fixed start, terminal goal
//! ball, per-step control norm bound):
//!
//! * a scalar measure of the observability Gramian (or SFIM) plus control
//!   effort, and
//! * the cumulative posterior covariance trace `Σ_{t=1..K} tr(P⁺_t)` plus
//!   control effort.

mod init;
mod solver;

use alloc::vec::Vec;

pub use init::{initial_trajectory, InitialTrajectory};
pub use solver::{solve, solve_with_restarts, InnerStatus, PlanResult, SolverOptions};

use crate::error::{Error, Result};
use crate::gramian::{observability_gramian, sfim, GramianKind, MeasureKind};
use crate::linalg::{ControlVec, Vector};
use crate::models::linearize_trajectory;
use crate::riccati::propagate;
use crate::scenario::ScenarioConfig;
use crate::trajectory::{rollout_nominal, NominalTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanObjective {
    GramianMeasure { measure: MeasureKind, kind: GramianKind },
    CovTrace,
}

impl PlanObjective {
    /// A measure of the plain observability Gramian.
    pub fn og(measure: MeasureKind) -> Self {
        PlanObjective::GramianMeasure {
            measure,
            kind: GramianKind::Og,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanProblem {
    pub scenario: ScenarioConfig,
    pub objective: PlanObjective,
}

/// Objective value at one control sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// The Gramian measure fell back to its sentinel.
    pub degenerate: bool,
}

/// Constraint values in meters; feasible when every entry is `≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintValues {
    /// `‖x_K − x_g‖ − r_g`.
    pub terminal: f64,
    /// `‖u_t‖ − r_u` per step.
    pub control_norms: Vec<f64>,
}

impl ConstraintValues {
    pub fn terminal_residual(&self) -> f64 {
        self.terminal.max(0.0)
    }

    pub fn control_residual(&self) -> f64 {
        self.control_norms.iter().fold(0.0, |m, c| m.max(*c))
    }

    /// Largest violation over both constraint families.
    pub fn residual(&self) -> f64 {
        self.terminal_residual().max(self.control_residual())
    }
}

impl PlanProblem {
    pub fn new(scenario: ScenarioConfig, objective: PlanObjective) -> Self {
        PlanProblem { scenario, objective }
    }

    pub fn horizon(&self) -> usize {
        self.scenario.horizon
    }

    pub fn control_dim(&self) -> usize {
        self.scenario.process.control_dim()
    }

    fn check_controls(&self, controls: &[ControlVec]) -> Result<()> {
        if controls.len() != self.horizon() {
            return Err(Error::dim("plan controls", self.horizon(), controls.len()));
        }
        if controls.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidArgument("non-finite control".into()));
        }
        Ok(())
    }

    pub fn rollout(&self, controls: &[ControlVec]) -> Result<NominalTrajectory> {
        self.check_controls(controls)?;
        rollout_nominal(&self.scenario.process, &self.scenario.x0, controls)
    }

    fn control_effort(&self, controls: &[ControlVec]) -> f64 {
        let w = &self.scenario.control_weight;
        controls.iter().map(|u| u.dot(&w.mul_vec(u))).sum()
    }

    /// Rollout, linearize, then Gramian measure or cumulative covariance
    /// trace, plus `Σ uᵀ W^u u`.
    pub fn evaluate(&self, controls: &[ControlVec]) -> Result<Evaluation> {
        let s = &self.scenario;
        let traj = self.rollout(controls)?;
        let lin = linearize_trajectory(&s.process, &s.observation, &traj)?;
        let (value, degenerate) = match self.objective {
            PlanObjective::CovTrace => {
                let sigma_nu = s.sigma_nu_matrix()?;
                let cov = propagate(&lin, &s.sigma_w, &sigma_nu, &s.sigma_x0)?;
                (cov.cumulative, false)
            }
            PlanObjective::GramianMeasure { measure, kind } => {
                let g = match kind {
                    GramianKind::Og => observability_gramian(&lin, s.gramian)?,
                    GramianKind::Sfim => sfim(&lin, &s.sigma_nu_matrix()?, s.gramian)?,
                };
                let m = g.measure(measure);
                (m.value, m.degenerate)
            }
        };
        Ok(Evaluation {
            value: value + self.control_effort(controls),
            degenerate,
        })
    }

    pub fn evaluate_constraints(&self, controls: &[ControlVec]) -> Result<ConstraintValues> {
        let traj = self.rollout(controls)?;
        let s = &self.scenario;
        Ok(ConstraintValues {
            terminal: (traj.terminal() - &s.goal).norm() - s.r_g,
            control_norms: controls.iter().map(|u| u.norm() - s.r_u).collect(),
        })
    }
}

pub fn evaluate_objective(problem: &PlanProblem, controls: &[ControlVec]) -> Result<f64> {
    problem.evaluate(controls).map(|e| e.value)
}

pub fn evaluate_constraints(problem: &PlanProblem, controls: &[ControlVec]) -> Result<ConstraintValues> {
    problem.evaluate_constraints(controls)
}

/// Concatenates controls into one decision vector.
pub fn flatten_controls(controls: &[ControlVec]) -> Vec<f64> {
    controls.iter().flat_map(|u| u.iter().copied()).collect()
}

/// Splits a decision vector into controls of dimension `n_u`.
pub fn unflatten_controls(flat: &[f64], n_u: usize) -> Vec<ControlVec> {
    flat.chunks(n_u).map(Vector::from_slice).collect()
}
