//! Experiment configuration files.
//!
//! One TOML file describes one experiment: the problem, the solver settings
//! and the options of the evaluation and export commands. Unknown keys are
//! rejected at every level. Scalar fields can be overridden with dotted
//! `key.path=value` assignments, which are applied to the parsed table
//! before it is interpreted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iteration::SolverConfig;
use crate::problem::{
    make_double_well_1d, make_double_well_nd, make_eikonal, make_three_hole_2d, ControlProblem, DriftSign,
    NoiseOptions, ProblemError,
};
use crate::reference::FdOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("bad override '{0}': expected key.path=value")]
    Override(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn default_sigma() -> f64 {
    1.0
}

fn default_kappa() -> f64 {
    5.0
}

/// The benchmark catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    Eikonal {},
    #[serde(rename = "double-well-1d")]
    DoubleWell1d {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        drift_sign: DriftSign,
    },
    #[serde(rename = "three-hole-2d")]
    ThreeHole2d {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        drift_sign: DriftSign,
    },
    DoubleWellNd {
        dim: usize,
        /// Same stiffness in every coordinate.
        #[serde(default = "default_kappa")]
        kappa: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        drift_sign: DriftSign,
    },
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ControlProblem, ProblemError> {
        match *self {
            ProblemConfig::Eikonal {} => Ok(make_eikonal()),
            ProblemConfig::DoubleWell1d { sigma, drift_sign } => {
                make_double_well_1d(NoiseOptions { sigma, drift_sign })
            }
            ProblemConfig::ThreeHole2d { sigma, drift_sign } => make_three_hole_2d(NoiseOptions { sigma, drift_sign }),
            ProblemConfig::DoubleWellNd { dim, kappa, sigma, drift_sign } => {
                make_double_well_nd(dim, vec![kappa; dim], NoiseOptions { sigma, drift_sign })
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemConfig::Eikonal {} => "eikonal",
            ProblemConfig::DoubleWell1d { .. } => "double-well-1d",
            ProblemConfig::ThreeHole2d { .. } => "three-hole-2d",
            ProblemConfig::DoubleWellNd { .. } => "double-well-nd",
        }
    }

    /// Start state used by the benchmark figures.
    pub fn default_start(&self) -> Vec<f64> {
        match *self {
            ProblemConfig::Eikonal {} | ProblemConfig::DoubleWell1d { .. } => vec![-1.0],
            ProblemConfig::ThreeHole2d { .. } => vec![1.8, 1.8],
            ProblemConfig::DoubleWellNd { dim, .. } => vec![-1.0; dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateOptions {
    /// Start state; the benchmark's default when absent.
    pub x0: Option<Vec<f64>>,
    pub trajectories: usize,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self { x0: None, trajectories: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlotOptions {
    /// Points per axis of value grids and slices.
    pub grid: usize,
    /// Controlled and uncontrolled trajectories to dump.
    pub trajectories: usize,
    pub x0: Option<Vec<f64>>,
    /// Keep every `stride`-th step in trajectory files.
    pub stride: usize,
    /// Paths in the distance-to-exit series.
    pub distance_paths: usize,
    /// Trajectories per controller in the cost table.
    pub cost_trajectories: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { grid: 200, trajectories: 10, x0: None, stride: 10, distance_paths: 50, cost_trajectories: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub seed: u64,
    /// Where outputs go; `runs/<problem>` when absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads, `0` for one per core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub evaluate: EvaluateOptions,
    #[serde(default)]
    pub reference: FdOptions,
    #[serde(default)]
    pub plotdata: PlotOptions,
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.solver.seed = cfg.seed;
        cfg.solver.validate().map_err(|e| ConfigError::Parse(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text, overrides)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs").join(self.problem.name()))
    }

    pub fn evaluation_start(&self) -> Vec<f64> {
        self.evaluate.x0.clone().unwrap_or_else(|| self.problem.default_start())
    }

    pub fn plot_start(&self) -> Vec<f64> {
        self.plotdata.x0.clone().unwrap_or_else(|| self.problem.default_start())
    }

    /// The fully resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}

/// Sets `a.b.c = value` in `table`, parsing `value` as a TOML value and
/// falling back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.into()))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::Override(assignment.into()));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("non-empty path");
    let mut cursor = table;
    for key in parents {
        let entry = cursor.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| ConfigError::Override(assignment.into()))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::EvaluationMode;

    const TEST4: &str = r#"
        seed = 7
        [problem]
        name = "double-well-nd"
        dim = 6
        [solver]
        degree = 6
        ranks = 5
        [solver.rollout]
        repetitions = 100
    "#;

    #[test]
    fn parses_nested_tables() {
        let cfg = RunConfig::from_toml(TEST4, &[]).unwrap();
        assert_eq!(cfg.solver.seed, 7);
        assert_eq!(cfg.solver.rollout.repetitions, 100);
        assert_eq!(cfg.solver.rollout.tau, 0.1);
        assert_eq!(cfg.evaluation_start(), vec![-1.0; 6]);
        let p = cfg.problem.build().unwrap();
        assert_eq!(p.state_dim(), 6);
        assert_eq!(cfg.output_dir(), PathBuf::from("runs/double-well-nd"));
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        assert!(RunConfig::from_toml("[problem]\nname = \"eikonal\"\nfoo = 1", &[]).is_err());
        assert!(RunConfig::from_toml("[problem]\nname = \"four-hole\"", &[]).is_err());
        for name in ["double-well-1d", "three-hole-2d"] {
            let cfg = RunConfig::from_toml(&format!("[problem]\nname = \"{name}\""), &[]).unwrap();
            assert_eq!(cfg.problem.name(), name);
        }
        assert!(RunConfig::from_toml("[problem]\nname = \"eikonal\"\n[solver]\ndegre = 3", &[]).is_err());
        assert!(RunConfig::from_toml("[problem]\nname = \"eikonal\"\n[solver.rollout]\nsteps = 3", &[]).is_err());
    }

    #[test]
    fn overrides_apply_before_parsing() {
        let cfg = RunConfig::from_toml(
            TEST4,
            &["solver.degree=3".into(), "problem.sigma=0.5".into(), "solver.evaluation.mode=projected".into()],
        )
        .unwrap();
        assert_eq!(cfg.solver.degree, 3);
        assert_eq!(cfg.solver.evaluation, EvaluationMode::Projected);
        assert!(matches!(cfg.problem, ProblemConfig::DoubleWellNd { sigma, .. } if sigma == 0.5));
        assert!(RunConfig::from_toml(TEST4, &["solver.degree".into()]).is_err());
        assert!(RunConfig::from_toml(TEST4, &["seed.x=1".into()]).is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::from_toml(TEST4, &[]).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml(), &[]).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn invalid_solver_settings_are_config_errors() {
        let text = "[problem]\nname = \"eikonal\"\n[solver]\ntolerance = -1.0";
        assert!(matches!(RunConfig::from_toml(text, &[]), Err(ConfigError::Parse(_))));
    }
}
