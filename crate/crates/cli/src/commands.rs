//! The `plan`, `compare` and `sweep` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::thread;

use anyhow::{anyhow, Context, Result};
use obsplan_core::eval::{
    assemble, initial_arm, og_objective, solve_arm, ArmReport, CompareOptions, ComparisonReport, ScenarioConfig,
};
use obsplan_core::gramian::{GramianKind, MeasureKind};
use obsplan_core::planner::{evaluate_objective, PlanObjective, PlanProblem};

use crate::report::{self, fmt_f64, ArmJson, ArmView, ReportJson, TOOL_VERSION};

/// Objective selector accepted by `plan --objective`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveArg(pub PlanObjective);

impl FromStr for ObjectiveArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "cov" {
            return Ok(ObjectiveArg(PlanObjective::CovTrace));
        }
        let (kind, measure) = match s.split_once(':') {
            Some(("og", m)) => (GramianKind::Og, m),
            Some(("sfim", m)) => (GramianKind::Sfim, m),
            _ => return Err(format!("expected `cov`, `og:<measure>` or `sfim:<measure>`, got `{s}`")),
        };
        let measure = MeasureKind::from_str(measure).map_err(|e| e.to_string())?;
        Ok(ObjectiveArg(PlanObjective::GramianMeasure { measure, kind }))
    }
}

impl ObjectiveArg {
    pub fn label(&self) -> String {
        match self.0 {
            PlanObjective::CovTrace => "cov".into(),
            PlanObjective::GramianMeasure {
                measure,
                kind: GramianKind::Og,
            } => format!("og:{measure}"),
            PlanObjective::GramianMeasure {
                measure,
                kind: GramianKind::Sfim,
            } => format!("sfim:{measure}"),
        }
    }

    fn arm_label(&self) -> &'static str {
        match self.0 {
            PlanObjective::CovTrace => "cov",
            PlanObjective::GramianMeasure { .. } => "og",
        }
    }
}

/// Parses `all` or a comma-separated list of measure names.
pub fn parse_measures(s: &str) -> Result<Vec<MeasureKind>, String> {
    if s == "all" {
        return Ok(MeasureKind::ALL.to_vec());
    }
    s.split(',')
        .map(|m| MeasureKind::from_str(m.trim()).map_err(|e| e.to_string()))
        .collect()
}

/// What a finished command reports back to `main`.
#[derive(Debug)]
pub struct Outcome {
    pub converged: bool,
    pub summary: String,
    pub failures: usize,
}

fn join<T>(h: thread::ScopedJoinHandle<'_, T>) -> T {
    h.join().unwrap_or_else(|p| std::panic::resume_unwind(p))
}

fn arm_converged(arm: &ArmReport) -> bool {
    arm.plan.as_ref().is_none_or(|p| p.converged)
}

pub fn run_plan(
    scenario: &ScenarioConfig,
    objective: ObjectiveArg,
    opts: &CompareOptions,
    out: &Path,
) -> Result<Outcome> {
    let (initial, planned) = thread::scope(|s| {
        let init = s.spawn(|| initial_arm(scenario));
        let planned = s.spawn(|| solve_arm(scenario, objective.0, opts));
        (join(init), join(planned))
    });
    let (initial, allocation, exceeds) = initial?;
    let planned = planned?;
    let problem = PlanProblem::new(scenario.clone(), objective.0);
    let initial_objective = evaluate_objective(&problem, &initial.controls)?;
    let plan = planned.plan.as_ref().expect("solved arm carries a plan");
    let label = objective.arm_label();

    let report = ReportJson {
        tool_version: TOOL_VERSION,
        command: "plan",
        scenario: scenario.name.clone(),
        objective: objective.label(),
        allocation,
        initial_exceeds_bound: exceeds,
        restarts: opts.restarts,
        seed: opts.seed,
        arms: vec![ArmJson::new("initial", &initial), ArmJson::new(label, &planned)],
        initial_objective: Some(initial_objective),
        objective_value: Some(plan.objective_value),
        gap_ratio: None,
        og_exceeds_initial: None,
    };
    let views = [
        ArmView {
            label: "initial",
            arm: &initial,
        },
        ArmView { label, arm: &planned },
    ];
    report::write_artifacts(out, scenario, &report, &views)?;

    let summary = format!(
        "{} {}: objective {:.6e} (initial {:.6e}), cumulative trace {:.6e} (initial {:.6e}), residual {:.2e}",
        scenario.name,
        objective.label(),
        plan.objective_value,
        initial_objective,
        planned.cumulative,
        initial.cumulative,
        plan.residual(),
    );
    Ok(Outcome {
        converged: plan.converged,
        summary,
        failures: 0,
    })
}

fn compare_summary(c: &ComparisonReport) -> String {
    format!(
        "{} {}: cumulative trace initial {:.6e}, og {:.6e}, cov {:.6e}, gap ratio {:.4}",
        c.scenario,
        c.measure,
        c.initial.cumulative,
        c.og.cumulative,
        c.cov.cumulative,
        c.gap_ratio()
    )
}

fn write_comparison(out: &Path, scenario: &ScenarioConfig, c: &ComparisonReport, opts: &CompareOptions) -> Result<()> {
    let report = report::comparison_json(c, opts.restarts, opts.seed);
    report::write_artifacts(out, scenario, &report, &report::comparison_views(c))
}

pub fn run_compare(
    scenario: &ScenarioConfig,
    measure: MeasureKind,
    opts: &CompareOptions,
    out: &Path,
) -> Result<Outcome> {
    let (initial, og, cov) = thread::scope(|s| {
        let initial = s.spawn(|| initial_arm(scenario));
        let og = s.spawn(|| solve_arm(scenario, og_objective(measure, opts), opts));
        let cov = s.spawn(|| solve_arm(scenario, PlanObjective::CovTrace, opts));
        (join(initial), join(og), join(cov))
    });
    let c = assemble(scenario, measure, initial?, og?, cov?);
    write_comparison(out, scenario, &c, opts)?;
    Ok(Outcome {
        converged: arm_converged(&c.og) && arm_converged(&c.cov),
        summary: compare_summary(&c),
        failures: 0,
    })
}

/// One comparison per measure; the initial and cov arms are shared.
pub fn run_sweep(
    scenario: &ScenarioConfig,
    measures: &[MeasureKind],
    opts: &CompareOptions,
    out: &Path,
) -> Result<Outcome> {
    let (initial, cov, og) = thread::scope(|s| {
        let initial = s.spawn(|| initial_arm(scenario));
        let cov = s.spawn(|| solve_arm(scenario, PlanObjective::CovTrace, opts));
        let og: Vec<_> = measures
            .iter()
            .map(|&m| s.spawn(move || solve_arm(scenario, og_objective(m, opts), opts)))
            .collect();
        (join(initial), join(cov), og.into_iter().map(join).collect::<Vec<_>>())
    });
    let initial = initial?;
    let cov = cov?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut csv = String::from("measure,initial,og,cov,gap_ratio\n");
    let mut summary = String::new();
    let mut converged = arm_converged(&cov);
    let mut failures = 0;
    for (&measure, og) in measures.iter().zip(og) {
        let result = og.map_err(anyhow::Error::from).and_then(|og| {
            converged &= arm_converged(&og);
            let c = assemble(scenario, measure, initial.clone(), og, cov.clone());
            write_comparison(&out.join(measure.name()), scenario, &c, opts)?;
            Ok(c)
        });
        match result {
            Ok(c) => {
                writeln!(
                    csv,
                    "{measure},{},{},{},{}",
                    fmt_f64(c.initial.cumulative),
                    fmt_f64(c.og.cumulative),
                    fmt_f64(c.cov.cumulative),
                    fmt_f64(c.gap_ratio())
                )
                .unwrap();
                writeln!(summary, "{}", compare_summary(&c)).unwrap();
            }
            Err(e) => {
                failures += 1;
                writeln!(
                    csv,
                    "{measure},{},,{},",
                    fmt_f64(initial.0.cumulative),
                    fmt_f64(cov.cumulative)
                )
                .unwrap();
                writeln!(summary, "{} {measure}: failed: {e:#}", scenario.name).unwrap();
            }
        }
    }
    let path = out.join("summary.csv");
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    Ok(Outcome {
        converged,
        summary: summary.trim_end().to_string(),
        failures,
    })
}

/// Default output directory for a run.
pub fn default_out(command: &str, scenario: &ScenarioConfig) -> PathBuf {
    PathBuf::from("runs").join(format!("{command}-{}", scenario.name))
}

/// Rejects an output path that exists as a regular file.
pub fn check_out(out: &Path) -> Result<()> {
    if out.is_file() {
        return Err(anyhow!("output path {} is a file", out.display()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_arguments() {
        assert_eq!("cov".parse::<ObjectiveArg>().unwrap().0, PlanObjective::CovTrace);
        let og: ObjectiveArg = "og:inv_min_eig".parse().unwrap();
        assert_eq!(og.0, PlanObjective::og(MeasureKind::InvMinEig));
        assert_eq!(og.label(), "og:inv_min_eig");
        assert_eq!(
            "sfim:neg_trace".parse::<ObjectiveArg>().unwrap().label(),
            "sfim:neg_trace"
        );
        assert!("og".parse::<ObjectiveArg>().is_err());
        assert!("og:largest".parse::<ObjectiveArg>().is_err());
    }

    #[test]
    fn measure_lists() {
        assert_eq!(parse_measures("all").unwrap().len(), 7);
        assert_eq!(
            parse_measures("neg_trace, det_inverse").unwrap(),
            [MeasureKind::NegTrace, MeasureKind::DetInverse]
        );
        assert!(parse_measures("neg_trace,").is_err());
    }
}
