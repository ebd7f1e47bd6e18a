//! Scenario presets and the three-arm comparison: the initial waypoint
//! path, the Gramian-optimized path and the covariance-optimized path, all
//! scored by their posterior covariance trace.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gramian::{GramianKind, GramianOptions, MeasureKind};
use crate::linalg::{ControlVec, CovMatrix, Matrix, StateVec};
use crate::models::{linearize_trajectory, LandmarkSet, ObservationModel, ProcessModel, SensorKind};
use crate::planner::{initial_trajectory, solve_with_restarts, PlanObjective, PlanProblem, PlanResult, SolverOptions};
use crate::riccati::{propagate, CovarianceTrace};
pub use crate::scenario::{ScenarioConfig, SensorNoise};
use crate::trajectory::NominalTrajectory;

/// Waypoints of the three-segment initial path shared by every preset.
pub const INITIAL_WAYPOINTS: [[f64; 2]; 4] = [[-1.5, -0.5], [-1.4, 0.21], [-1.1, 1.369], [-1.0, 2.25]];

fn cov(rows: [[f64; 2]; 2]) -> CovMatrix {
    CovMatrix::new(Matrix::from_rows(&rows)).expect("preset covariance is valid")
}

/// Builds one of the named scenarios `A`, `B` or `C`.
///
/// * `A`: range-squared sensing of three landmarks, correlated prior.
/// * `B`: range sensing of two landmarks, large vertical process noise.
/// * `C`: range sensing of three landmarks with a very accurate sensor.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let (kind, landmarks, sigma_x0, sigma_w, sigma_nu) = match name {
        "A" | "a" => (
            SensorKind::RangeSquared,
            vec![[0.2, 0.0], [0.5, 0.3], [2.0, 1.0]],
            cov([[0.025, 0.002], [0.002, 0.025]]),
            cov([[0.3, 0.0], [0.0, 0.1]]),
            0.1,
        ),
        "B" | "b" => (
            SensorKind::Range,
            vec![[0.2, 0.0], [0.6, 0.3]],
            cov([[0.25, 0.0], [0.0, 0.25]]),
            cov([[0.1, 0.0], [0.0, 1.0]]),
            0.015,
        ),
        "C" | "c" => (
            SensorKind::Range,
            vec![[0.0, 1.0], [0.5, 0.5], [0.1, 1.4]],
            cov([[0.02, 0.0], [0.0, 0.02]]),
            cov([[0.1, 0.0], [0.0, 0.1]]),
            0.0001,
        ),
        other => return Err(Error::UnknownPreset(other.into())),
    };
    Ok(ScenarioConfig {
        name: name.to_ascii_uppercase(),
        process: ProcessModel::SingleIntegrator,
        observation: ObservationModel::new(kind, LandmarkSet::new(landmarks)?),
        sigma_x0,
        sigma_w,
        sigma_nu: SensorNoise::Scalar(sigma_nu),
        x0: StateVec::from([-1.5, -0.5]),
        goal: StateVec::from([-1.0, 2.25]),
        r_g: 0.1,
        r_u: 0.8,
        horizon: 7,
        control_weight: Matrix::zeros(2, 2),
        waypoints: INITIAL_WAYPOINTS.to_vec(),
        gramian: GramianOptions::default(),
    })
}

/// `Σ_{t=1..K}` of a trace series of length `K+1`.
pub fn cumulative_trace(series: &[f64]) -> f64 {
    series.iter().skip(1).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Initial,
    Og,
    Cov,
}

impl Arm {
    pub fn label(&self) -> &'static str {
        match self {
            Arm::Initial => "initial",
            Arm::Og => "og",
            Arm::Cov => "cov",
        }
    }
}

/// One trajectory scored by its covariance evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmReport {
    pub arm: Arm,
    pub controls: Vec<ControlVec>,
    pub trajectory: NominalTrajectory,
    /// `tr(P⁺_t)` for `t = 0..K`.
    pub traces: Vec<f64>,
    pub cumulative: f64,
    /// Solver output; `None` for the initial path.
    pub plan: Option<PlanResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub scenario: String,
    pub measure: MeasureKind,
    /// Steps per initial-path segment.
    pub allocation: Vec<usize>,
    /// The initial path needs a control above `r_u` somewhere.
    pub initial_exceeds_bound: bool,
    pub initial: ArmReport,
    pub og: ArmReport,
    pub cov: ArmReport,
}

impl ComparisonReport {
    pub fn arms(&self) -> [&ArmReport; 3] {
        [&self.initial, &self.og, &self.cov]
    }

    /// `(og − cov) / cov` on cumulative traces.
    pub fn gap_ratio(&self) -> f64 {
        (self.og.cumulative - self.cov.cumulative) / self.cov.cumulative
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub solver: SolverOptions,
    pub restarts: usize,
    pub seed: u64,
    pub gramian_kind: GramianKind,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            solver: SolverOptions::default(),
            restarts: 0,
            seed: 0,
            gramian_kind: GramianKind::Og,
        }
    }
}

/// Covariance evolution of `scenario` along `controls`.
pub fn score_controls(
    scenario: &ScenarioConfig,
    controls: &[ControlVec],
) -> Result<(NominalTrajectory, CovarianceTrace)> {
    let problem = PlanProblem::new(scenario.clone(), PlanObjective::CovTrace);
    let traj = problem.rollout(controls)?;
    let lin = linearize_trajectory(&scenario.process, &scenario.observation, &traj)?;
    let cov = propagate(
        &lin,
        &scenario.sigma_w,
        &scenario.sigma_nu_matrix()?,
        &scenario.sigma_x0,
    )?;
    Ok((traj, cov))
}

fn arm_report(
    scenario: &ScenarioConfig,
    arm: Arm,
    controls: Vec<ControlVec>,
    plan: Option<PlanResult>,
) -> Result<ArmReport> {
    let (trajectory, cov) = score_controls(scenario, &controls)?;
    Ok(ArmReport {
        arm,
        controls,
        trajectory,
        cumulative: cumulative_trace(&cov.traces),
        traces: cov.traces,
        plan,
    })
}

/// The waypoint path the solvers start from.
pub fn initial_arm(scenario: &ScenarioConfig) -> Result<(ArmReport, Vec<usize>, bool)> {
    scenario.validate()?;
    let init = initial_trajectory(&scenario.waypoints, scenario.horizon, scenario.r_u)?;
    let report = arm_report(scenario, Arm::Initial, init.controls, None)?;
    Ok((report, init.allocation, init.exceeds_bound))
}

/// Solves with `objective` from the initial path and scores the result.
pub fn solve_arm(scenario: &ScenarioConfig, objective: PlanObjective, opts: &CompareOptions) -> Result<ArmReport> {
    scenario.validate()?;
    let init = initial_trajectory(&scenario.waypoints, scenario.horizon, scenario.r_u)?;
    let problem = PlanProblem::new(scenario.clone(), objective);
    let plan = solve_with_restarts(&problem, &init.controls, &opts.solver, opts.restarts, opts.seed)?;
    let arm = match objective {
        PlanObjective::CovTrace => Arm::Cov,
        PlanObjective::GramianMeasure { .. } => Arm::Og,
    };
    arm_report(scenario, arm, plan.controls.clone(), Some(plan))
}

pub fn og_objective(measure: MeasureKind, opts: &CompareOptions) -> PlanObjective {
    PlanObjective::GramianMeasure {
        measure,
        kind: opts.gramian_kind,
    }
}

/// Combines separately computed arms into a report.
pub fn assemble(
    scenario: &ScenarioConfig,
    measure: MeasureKind,
    initial: (ArmReport, Vec<usize>, bool),
    og: ArmReport,
    cov: ArmReport,
) -> ComparisonReport {
    let (initial, allocation, initial_exceeds_bound) = initial;
    ComparisonReport {
        scenario: scenario.name.clone(),
        measure,
        allocation,
        initial_exceeds_bound,
        initial,
        og,
        cov,
    }
}

/// Initial path versus Gramian-optimized versus covariance-optimized.
pub fn compare(scenario: &ScenarioConfig, measure: MeasureKind, opts: &CompareOptions) -> Result<ComparisonReport> {
    let initial = initial_arm(scenario)?;
    let og = solve_arm(scenario, og_objective(measure, opts), opts)?;
    let cov = solve_arm(scenario, PlanObjective::CovTrace, opts)?;
    Ok(assemble(scenario, measure, initial, og, cov))
}
