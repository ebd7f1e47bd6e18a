//! Scenario JSON files.
//!
//! Field names follow [`ScenarioConfig`]; matrices are row-major nested
//! arrays and every length is in meters.

use std::fs;
use std::path::Path;

use obsplan_core::eval::{preset, ScenarioConfig, SensorNoise};
use obsplan_core::gramian::GramianOptions;
use obsplan_core::models::{Combine, LandmarkSet, ObservationModel, ProcessModel, SensorKind};
use obsplan_core::{CovMatrix, Matrix, StateVec};
use serde::{Deserialize, Serialize};

/// A configuration problem, tagged with the offending field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessName {
    SingleIntegrator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationName {
    Range,
    RangeSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CombineName {
    #[default]
    Stacked,
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

fn default_true() -> bool {
    true
}

/// On-disk scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub process: ProcessName,
    pub observation: ObservationName,
    #[serde(default)]
    pub combine: CombineName,
    pub landmarks: Vec<[f64; 2]>,
    pub sigma_x0: Vec<Vec<f64>>,
    pub sigma_w: Vec<Vec<f64>>,
    pub sigma_nu: NoiseSpec,
    pub x0: Vec<f64>,
    pub goal: Vec<f64>,
    pub r_g: f64,
    pub r_u: f64,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_weight: Option<Vec<Vec<f64>>>,
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default = "default_true")]
    pub include_initial_step: bool,
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Result<Matrix, ConfigError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError::new(field, "must be a non-empty square array of rows"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::new(field, "must be finite"));
    }
    Ok(Matrix::from_row_slice(n, n, &flat))
}

fn covariance(field: &str, rows: &[Vec<f64>]) -> Result<CovMatrix, ConfigError> {
    CovMatrix::new(matrix(field, rows)?).map_err(|e| ConfigError::new(field, e))
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).to_vec()).collect()
}

impl ScenarioFile {
    pub fn to_config(&self) -> Result<ScenarioConfig, ConfigError> {
        let landmarks = LandmarkSet::new(self.landmarks.clone()).map_err(|e| ConfigError::new("landmarks", e))?;
        let kind = match self.observation {
            ObservationName::Range => SensorKind::Range,
            ObservationName::RangeSquared => SensorKind::RangeSquared,
        };
        let combine = match self.combine {
            CombineName::Stacked => Combine::Stacked,
            CombineName::Nearest => Combine::Nearest,
        };
        let sigma_nu = match &self.sigma_nu {
            NoiseSpec::Scalar(s) => SensorNoise::Scalar(*s),
            NoiseSpec::Matrix(rows) => SensorNoise::Matrix(covariance("sigma_nu", rows)?),
        };
        let control_weight = match &self.control_weight {
            Some(rows) => matrix("control_weight", rows)?,
            None => Matrix::zeros(2, 2),
        };
        let config = ScenarioConfig {
            name: self.name.clone(),
            process: match self.process {
                ProcessName::SingleIntegrator => ProcessModel::SingleIntegrator,
            },
            observation: ObservationModel::new(kind, landmarks).with_combine(combine),
            sigma_x0: covariance("sigma_x0", &self.sigma_x0)?,
            sigma_w: covariance("sigma_w", &self.sigma_w)?,
            sigma_nu,
            x0: StateVec::from_slice(&self.x0),
            goal: StateVec::from_slice(&self.goal),
            r_g: self.r_g,
            r_u: self.r_u,
            horizon: self.horizon,
            control_weight,
            waypoints: self.waypoints.clone(),
            gramian: GramianOptions {
                include_initial: self.include_initial_step,
            },
        };
        config.validate().map_err(|e| match e {
            obsplan_core::Error::InvalidField { field, message } => ConfigError { field, message },
            other => ConfigError::new("scenario", other),
        })?;
        Ok(config)
    }

    pub fn from_config(c: &ScenarioConfig) -> Self {
        ScenarioFile {
            name: c.name.clone(),
            process: match c.process {
                ProcessModel::SingleIntegrator => ProcessName::SingleIntegrator,
            },
            observation: match c.observation.kind {
                SensorKind::Range => ObservationName::Range,
                SensorKind::RangeSquared => ObservationName::RangeSquared,
            },
            combine: match c.observation.combine {
                Combine::Stacked => CombineName::Stacked,
                Combine::Nearest => CombineName::Nearest,
            },
            landmarks: c.observation.landmarks.positions().to_vec(),
            sigma_x0: rows_of(c.sigma_x0.matrix()),
            sigma_w: rows_of(c.sigma_w.matrix()),
            sigma_nu: match &c.sigma_nu {
                SensorNoise::Scalar(s) => NoiseSpec::Scalar(*s),
                SensorNoise::Matrix(m) => NoiseSpec::Matrix(rows_of(m.matrix())),
            },
            x0: c.x0.as_slice().to_vec(),
            goal: c.goal.as_slice().to_vec(),
            r_g: c.r_g,
            r_u: c.r_u,
            horizon: c.horizon,
            control_weight: Some(rows_of(&c.control_weight)),
            waypoints: c.waypoints.clone(),
            include_initial_step: c.gramian.include_initial,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| {
        // serde reports the field for missing/unknown keys in its message
        ConfigError::new("scenario", e)
    })?;
    file.to_config()
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// A config file path or a preset name, exactly one of which must be given.
pub fn resolve(path: Option<&Path>, preset_name: Option<&str>) -> Result<ScenarioConfig, ConfigError> {
    match (path, preset_name) {
        (Some(p), None) => load_scenario(p),
        (None, Some(name)) => preset(name).map_err(|e| ConfigError::new("preset", e)),
        (Some(_), Some(_)) => Err(ConfigError::new(
            "config",
            "give either a config file or --preset, not both",
        )),
        (None, None) => Err(ConfigError::new("config", "a config file or --preset is required")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_json() {
        for name in ["A", "B", "C"] {
            let c = preset(name).unwrap();
            let json = ScenarioFile::from_config(&c).to_json();
            assert_eq!(parse_scenario(&json).unwrap(), c);
        }
    }

    #[test]
    fn negative_sensor_noise_names_the_field() {
        let mut f = ScenarioFile::from_config(&preset("A").unwrap());
        f.sigma_nu = NoiseSpec::Scalar(-1.0);
        let err = f.to_config().unwrap_err();
        assert_eq!(err.field, "sigma_nu");
    }

    #[test]
    fn covariance_errors_name_the_field() {
        let mut f = ScenarioFile::from_config(&preset("B").unwrap());
        f.sigma_w = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert_eq!(f.to_config().unwrap_err().field, "sigma_w");
        let mut f = ScenarioFile::from_config(&preset("B").unwrap());
        f.sigma_x0 = vec![vec![1.0, 0.0]];
        assert_eq!(f.to_config().unwrap_err().field, "sigma_x0");
        let mut f = ScenarioFile::from_config(&preset("B").unwrap());
        f.r_g = 0.0;
        assert_eq!(f.to_config().unwrap_err().field, "r_g");
        let mut f = ScenarioFile::from_config(&preset("B").unwrap());
        f.landmarks.clear();
        assert_eq!(f.to_config().unwrap_err().field, "landmarks");
    }

    #[test]
    fn matrix_noise_and_defaults() {
        let json = r#"{
            "name": "custom", "process": "single_integrator", "observation": "range",
            "landmarks": [[0, 0], [1, 0]],
            "sigma_x0": [[0.1, 0], [0, 0.1]], "sigma_w": [[0.01, 0], [0, 0.01]],
            "sigma_nu": [[0.02, 0], [0, 0.03]],
            "x0": [-1, -1], "goal": [1, 1], "r_g": 0.1, "r_u": 0.8, "horizon": 5,
            "waypoints": [[-1, -1], [1, 1]]
        }"#;
        let c = parse_scenario(json).unwrap();
        assert!(c.gramian.include_initial);
        assert_eq!(c.observation.combine, Combine::Stacked);
        assert_eq!(c.control_weight, Matrix::zeros(2, 2));
        assert_eq!(c.sigma_nu_matrix().unwrap().matrix()[(1, 1)], 0.03);
    }
}
