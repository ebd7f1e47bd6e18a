//! Run artifacts: report.json, traces.csv, trajectory.csv and the plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use obsplan_core::eval::{ArmReport, ComparisonReport, ScenarioConfig};
use obsplan_core::planner::{InnerStatus, PlanResult};
use serde::Serialize;

use crate::config::ScenarioFile;
use crate::svg;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct SolverJson {
    pub objective_value: f64,
    pub terminal_residual: f64,
    pub control_residual: f64,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub inner_status: &'static str,
    pub degenerate: bool,
}

impl From<&PlanResult> for SolverJson {
    fn from(p: &PlanResult) -> Self {
        SolverJson {
            objective_value: p.objective_value,
            terminal_residual: p.terminal_residual,
            control_residual: p.control_residual,
            iterations: p.iterations,
            outer_iterations: p.outer_iterations,
            converged: p.converged,
            inner_status: match p.inner_status {
                InnerStatus::GradientTolerance => "gradient_tolerance",
                InnerStatus::LineSearchStalled => "line_search_stalled",
                InnerStatus::IterationLimit => "iteration_limit",
            },
            degenerate: p.degenerate,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ArmJson {
    pub label: String,
    pub cumulative_trace: f64,
    pub traces: Vec<f64>,
    pub controls: Vec<Vec<f64>>,
    pub states: Vec<Vec<f64>>,
    pub solver: Option<SolverJson>,
}

impl ArmJson {
    pub fn new(label: &str, arm: &ArmReport) -> Self {
        ArmJson {
            label: label.to_string(),
            cumulative_trace: arm.cumulative,
            traces: arm.traces.clone(),
            controls: arm.controls.iter().map(|u| u.as_slice().to_vec()).collect(),
            states: arm.trajectory.states().iter().map(|x| x.as_slice().to_vec()).collect(),
            solver: arm.plan.as_ref().map(SolverJson::from),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub scenario: String,
    /// `cov` or `og:<measure>` for plan; the Gramian measure for compare.
    pub objective: String,
    pub allocation: Vec<usize>,
    pub initial_exceeds_bound: bool,
    pub restarts: usize,
    pub seed: u64,
    pub arms: Vec<ArmJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub og_exceeds_initial: Option<bool>,
}

/// One labelled arm as written to CSV and plots.
pub struct ArmView<'a> {
    pub label: &'a str,
    pub arm: &'a ArmReport,
}

/// Formats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn traces_csv(arms: &[ArmView<'_>]) -> String {
    let mut out = String::from("t");
    for a in arms {
        out.push(',');
        out.push_str(a.label);
    }
    out.push('\n');
    let len = arms.first().map_or(0, |a| a.arm.traces.len());
    for t in 0..len {
        write!(out, "{t}").unwrap();
        for a in arms {
            write!(out, ",{}", fmt_f64(a.arm.traces[t])).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(arms: &[ArmView<'_>]) -> String {
    let mut out = String::from("t,x,y,arm\n");
    for a in arms {
        for (t, x) in a.arm.trajectory.states().iter().enumerate() {
            writeln!(out, "{t},{},{},{}", fmt_f64(x[0]), fmt_f64(x[1]), a.label).unwrap();
        }
    }
    out
}

/// Parses traces.csv back into its header and per-column series.
pub fn parse_traces_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .context("empty traces.csv")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut columns = vec![Vec::new(); header.len().saturating_sub(1)];
    for line in lines {
        for (col, field) in line.split(',').skip(1).enumerate() {
            columns
                .get_mut(col)
                .context("row wider than header")?
                .push(field.parse::<f64>().with_context(|| format!("bad value {field:?}"))?);
        }
    }
    Ok((header, columns))
}

/// Writes the full artifact set for one run into `dir`.
pub fn write_artifacts(dir: &Path, scenario: &ScenarioConfig, report: &ReportJson, arms: &[ArmView<'_>]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };
    write("scenario.json", ScenarioFile::from_config(scenario).to_json())?;
    write("report.json", serde_json::to_string_pretty(report)? + "\n")?;
    write("traces.csv", traces_csv(arms))?;
    write("trajectory.csv", trajectory_csv(arms))?;
    write("plot_traces.svg", svg::traces_plot(arms))?;
    write("plot_paths.svg", svg::paths_plot(scenario, arms))?;
    Ok(())
}

pub fn comparison_json(c: &ComparisonReport, restarts: usize, seed: u64) -> ReportJson {
    ReportJson {
        tool_version: TOOL_VERSION,
        command: "compare",
        scenario: c.scenario.clone(),
        objective: c.measure.name().to_string(),
        allocation: c.allocation.clone(),
        initial_exceeds_bound: c.initial_exceeds_bound,
        restarts,
        seed,
        arms: c.arms().iter().map(|a| ArmJson::new(a.arm.label(), a)).collect(),
        initial_objective: None,
        objective_value: None,
        gap_ratio: Some(c.gap_ratio()),
        og_exceeds_initial: Some(c.og.cumulative > c.initial.cumulative),
    }
}

pub fn comparison_views(c: &ComparisonReport) -> Vec<ArmView<'_>> {
    c.arms()
        .into_iter()
        .map(|a| ArmView {
            label: a.arm.label(),
            arm: a,
        })
        .collect()
}
