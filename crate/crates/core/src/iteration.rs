//! Policy iteration with Monte-Carlo evaluation and tensor-train regression.
//!
//! Each outer iteration samples initial states in `Ξ`, runs `M` short
//! rollouts of horizon `τ` from each under the current feedback, and fits a
//! new value model to the Bellman targets
//!
//! ```text
//! y_i = (1/M) Σ_j [ ∫₀^{τ∧η} (c + uᵀBu) dt + 1{η > τ} v(X_τ) ].
//! ```
//!
//! Two evaluation modes are available. `FixedPoint` repeats the regression
//! with `v` on the right-hand side replaced by the latest fit, reusing the
//! rollouts. `Projected` solves the linear fixed point of that map directly.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, BasisKind, BasisSet};
use crate::policy::{EitherPolicy, FeedbackPolicy};
use crate::problem::{ControlProblem, ProblemError};
use crate::rng::{Purpose, StreamFactory};
use crate::rollout::{make_targets, simulate_paths, RolloutConfig, RolloutError};
use crate::tensor_train::{
    als_fit, AlsConfig, AlsError, ModelError, RegressionData, RidgePolicy, Successors, TensorTrain, ValueModel,
};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rollouts failed in iteration {iteration}: {source}")]
    Rollout { iteration: usize, source: RolloutError },
    #[error("regression failed in iteration {iteration}: {source}")]
    Als { iteration: usize, source: AlsError },
}

/// Bond ranks: one value for every bond or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RankSpec {
    Uniform(usize),
    List(Vec<usize>),
}

impl Default for RankSpec {
    fn default() -> Self {
        RankSpec::Uniform(4)
    }
}

impl RankSpec {
    /// Requested ranks for `order` dimensions, capped to what the modes allow.
    pub fn resolve(&self, modes: &[usize]) -> Result<Vec<usize>, SolverError> {
        let bonds = modes.len().saturating_sub(1);
        let requested = match self {
            RankSpec::Uniform(r) => vec![*r; bonds],
            RankSpec::List(list) if list.len() == bonds => list.clone(),
            RankSpec::List(list) => {
                return Err(SolverError::Config(format!("{} ranks given for {bonds} bonds", list.len())));
            }
        };
        if requested.contains(&0) {
            return Err(SolverError::Config("ranks must be positive".into()));
        }
        Ok(TensorTrain::feasible_ranks(modes, &requested))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EvaluationMode {
    /// Regress on targets built from the previous fit, `inner_iterations`
    /// times per set of rollouts.
    FixedPoint { inner_iterations: usize },
    /// Least-squares fixed point `Φθ ≈ c̄ + Sθ` in one fit.
    Projected,
}

impl Default for EvaluationMode {
    fn default() -> Self {
        EvaluationMode::FixedPoint { inner_iterations: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Polynomial degree per dimension.
    pub degree: usize,
    pub ranks: RankSpec,
    pub basis: BasisKind,
    /// Reference interval of the basis; states are mapped onto it affinely.
    pub basis_interval: [f64; 2],
    pub samples_per_dof: f64,
    /// Fixed sample count, overriding `samples_per_dof`.
    pub samples: Option<usize>,
    /// Extra samples on the exit boundary with target zero.
    pub boundary_samples: usize,
    pub rollout: RolloutConfig,
    pub sweeps: usize,
    /// Ridge factor relative to the current risk; `None` means `1/N`.
    pub ridge_scale: Option<f64>,
    pub ridge_floor: f64,
    pub evaluation: EvaluationMode,
    pub max_iterations: usize,
    /// Relative sup-norm change on the probe set that counts as converged.
    pub tolerance: f64,
    pub probes: usize,
    /// Set from the run configuration's top-level seed.
    #[serde(skip)]
    pub seed: u64,
    /// Draw fresh initial states every iteration.
    pub resample: bool,
    pub u_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            degree: 4,
            ranks: RankSpec::default(),
            basis: BasisKind::OrthonormalH1,
            basis_interval: [-1.0, 1.0],
            samples_per_dof: 10.0,
            samples: None,
            boundary_samples: 0,
            rollout: RolloutConfig::default(),
            sweeps: 3,
            ridge_scale: None,
            ridge_floor: 1e-12,
            evaluation: EvaluationMode::default(),
            max_iterations: 15,
            tolerance: 1e-3,
            probes: 256,
            seed: 0,
            resample: true,
            u_max: 100.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.into()));
        if !(self.samples_per_dof.is_finite() && self.samples_per_dof > 0.0) {
            return bad("samples_per_dof must be positive");
        }
        if self.samples == Some(0) {
            return bad("samples must be positive");
        }
        if self.sweeps == 0 || self.max_iterations == 0 {
            return bad("sweeps and max_iterations must be positive");
        }
        if !(self.tolerance > 0.0) || !(self.u_max > 0.0) || !(self.ridge_floor >= 0.0) {
            return bad("tolerance and u_max must be positive, ridge_floor non-negative");
        }
        if self.ridge_scale.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
            return bad("ridge_scale must be finite and non-negative");
        }
        if matches!(self.evaluation, EvaluationMode::FixedPoint { inner_iterations: 0 }) {
            return bad("inner_iterations must be positive");
        }
        if self.probes == 0 {
            return bad("probes must be positive");
        }
        self.rollout.validate().map_err(|e| SolverError::Config(e.to_string()))
    }

    /// Mode sizes and capped bond ranks for a problem of dimension `n`.
    pub fn layout(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>), SolverError> {
        let modes = vec![self.degree + 1; n];
        let ranks = self.ranks.resolve(&modes)?;
        Ok((modes, ranks))
    }

    /// `N`, either given or `⌈samples_per_dof · dof⌉`.
    pub fn sample_count(&self, dof: usize) -> usize {
        self.samples.unwrap_or_else(|| (self.samples_per_dof * dof as f64).ceil() as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    pub iteration: usize,
    pub samples: usize,
    /// Empirical risk of the final fit in this iteration.
    pub risk: f64,
    /// Risk of the starting model on the first fit.
    pub initial_risk: f64,
    /// δ per ALS sweep, over all fits of the iteration.
    pub deltas: Vec<f64>,
    pub fits: usize,
    /// Relative sup change on the probe set; absent in the first iteration.
    pub probe_change: Option<f64>,
    pub probe_max_abs: f64,
    /// `sup |v|` over points sampled on the exit boundary.
    pub boundary_sup: Option<f64>,
    pub exit_fraction: f64,
    pub wall_seconds: f64,
    pub stagnating: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub model: ValueModel,
    pub diagnostics: Vec<IterationDiagnostics>,
    pub converged: bool,
    pub samples: usize,
}

/// `N` i.i.d. uniform states in `Ξ`, row-major.
pub fn sample_initial_states(
    problem: &ControlProblem,
    count: usize,
    streams: &StreamFactory,
    round: u64,
) -> Result<Vec<f64>, ProblemError> {
    let mut rng = streams.stream(Purpose::Samples, round, 0);
    problem.sample_interior(count, &mut rng)
}

/// Model values at row-major points.
pub fn probe_values(model: &ValueModel, points: &[f64]) -> Result<Vec<f64>, ModelError> {
    let n = model.dim();
    let eval = model.evaluator();
    let mut ws = eval.workspace();
    points.chunks(n).map(|x| eval.value(x, &mut ws)).collect()
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let diff = new.iter().zip(old).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = new.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn boundary_sup(
    problem: &ControlProblem,
    model: &ValueModel,
    streams: &StreamFactory,
    round: u64,
) -> Result<Option<f64>, SolverError> {
    let mut rng = streams.stream(Purpose::BoundarySamples, round, 1);
    let points = match problem.sample_exit_boundary(64, &mut rng) {
        Ok(p) => p,
        Err(ProblemError::ExitSet(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let n = problem.state_dim();
    let inside: Vec<f64> = points.chunks(n).filter(|x| model.inside(x)).flatten().copied().collect();
    if inside.is_empty() {
        return Ok(None);
    }
    Ok(Some(probe_values(model, &inside)?.iter().map(|v| v.abs()).fold(0.0, f64::max)))
}

/// Runs policy iteration from the zero control, reporting each iteration to
/// `observe` as soon as it finishes.
pub fn policy_iteration_with(
    problem: &ControlProblem,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&IterationDiagnostics),
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let n = problem.state_dim();
    let (modes, ranks) = cfg.layout(n)?;
    let interval = (cfg.basis_interval[0], cfg.basis_interval[1]);
    let bases = (0..n).map(|_| BasisSet::new(cfg.degree, interval, cfg.basis)).collect::<Result<Vec<_>, _>>()?;
    let streams = StreamFactory::new(cfg.seed);
    let tt = TensorTrain::random(&modes, &ranks, &mut streams.stream(Purpose::TensorInit, 0, 0));
    let mut fit_model = ValueModel::new(tt, bases, problem.domain().to_vec())?;
    let dof = fit_model.tt().num_params();
    let samples = cfg.sample_count(dof);
    let ridge = RidgePolicy::Adaptive {
        scale: cfg.ridge_scale.unwrap_or(1.0 / (samples + cfg.boundary_samples) as f64),
        floor: cfg.ridge_floor,
    };
    let als_cfg = AlsConfig { sweeps: cfg.sweeps, ridge };

    let probes = {
        let mut rng = streams.stream(Purpose::Probes, 0, 0);
        problem.sample_interior(cfg.probes, &mut rng)?
    };
    let mut current: Option<ValueModel> = None;
    let mut previous_probes: Option<Vec<f64>> = None;
    let mut diagnostics: Vec<IterationDiagnostics> = Vec::new();
    let mut converged = false;
    let mut fixed_states: Option<Vec<f64>> = None;

    for k in 0..cfg.max_iterations {
        let start = Instant::now();
        let round = k as u64;
        let x0 = match (&fixed_states, cfg.resample) {
            (Some(x), false) => x.clone(),
            _ => {
                let x = sample_initial_states(problem, samples, &streams, if cfg.resample { round } else { 0 })?;
                fixed_states = Some(x.clone());
                x
            }
        };
        let policy = match &current {
            None => EitherPolicy::Zero,
            Some(m) => EitherPolicy::Feedback(FeedbackPolicy::new(problem, m, cfg.u_max)),
        };
        let batch = simulate_paths(problem, &policy, &x0, &cfg.rollout, &streams, round)
            .map_err(|source| SolverError::Rollout { iteration: k, source })?;
        log::debug!("iteration {k}: rollouts done in {:.2}s", start.elapsed().as_secs_f64());

        let anchors = if cfg.boundary_samples > 0 {
            let mut rng = streams.stream(Purpose::BoundarySamples, round, 0);
            let pts = problem.sample_exit_boundary(cfg.boundary_samples, &mut rng)?;
            pts.chunks(n).filter(|x| fit_model.inside(x)).flatten().copied().collect()
        } else {
            Vec::new()
        };
        let anchor_count = anchors.len() / n;
        let mut points = x0.clone();
        points.extend_from_slice(&anchors);
        let with_anchors = |mut y: Vec<f64>| {
            y.resize(samples + anchor_count, 0.0);
            y
        };

        let mut deltas = Vec::new();
        let mut initial_risk = None;
        let fit = |data: &RegressionData, init: &ValueModel| {
            als_fit(data, init, &als_cfg).map_err(|source| SolverError::Als { iteration: k, source })
        };
        let (model, risk, fits) = match cfg.evaluation {
            EvaluationMode::Projected => {
                let mut succ = batch.successors();
                let total = *succ.offsets.last().unwrap();
                succ.offsets.extend(std::iter::repeat_n(total, anchor_count));
                let succ = Successors { offsets: succ.offsets, points: succ.points, coefs: succ.coefs };
                let data = RegressionData::new(n, points.clone(), with_anchors(batch.mean_costs()))
                    .and_then(|d| d.with_successors(succ))
                    .map_err(|source| SolverError::Als { iteration: k, source })?;
                let out = fit(&data, &fit_model)?;
                initial_risk = Some(out.report.initial_risk);
                deltas.extend_from_slice(&out.report.deltas);
                let risk = out.report.final_risk;
                (out.model, risk, 1)
            }
            EvaluationMode::FixedPoint { inner_iterations } => {
                let mut rhs = current.clone();
                let mut model = fit_model.clone();
                let mut risk = f64::NAN;
                for _ in 0..inner_iterations {
                    let y = make_targets(&batch, rhs.as_ref())
                        .map_err(|source| SolverError::Rollout { iteration: k, source })?;
                    let data = RegressionData::new(n, points.clone(), with_anchors(y))
                        .map_err(|source| SolverError::Als { iteration: k, source })?;
                    let out = fit(&data, &model)?;
                    initial_risk.get_or_insert(out.report.initial_risk);
                    deltas.extend_from_slice(&out.report.deltas);
                    risk = out.report.final_risk;
                    model = out.model;
                    rhs = Some(model.clone());
                }
                (model, risk, inner_iterations)
            }
        };

        log::debug!("iteration {k}: {fits} fits done after {:.2}s", start.elapsed().as_secs_f64());
        let values = probe_values(&model, &probes)?;
        let probe_change = previous_probes.as_ref().map(|old| relative_change(&values, old));
        let probe_max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let boundary = boundary_sup(problem, &model, &streams, round)?;
        let stagnating = diagnostics.len() >= 3 && {
            let r: Vec<f64> = diagnostics[diagnostics.len() - 3..].iter().map(|d| d.risk).chain([risk]).collect();
            r.windows(2).all(|w| w[1] >= w[0])
        };
        if stagnating {
            log::warn!("iteration {k}: empirical risk has not decreased over 3 iterations");
        }
        let diag = IterationDiagnostics {
            iteration: k,
            samples: samples + anchor_count,
            risk,
            initial_risk: initial_risk.unwrap_or(f64::NAN),
            deltas,
            fits,
            probe_change,
            probe_max_abs,
            boundary_sup: boundary,
            exit_fraction: batch.exit_fraction(),
            wall_seconds: start.elapsed().as_secs_f64(),
            stagnating,
        };
        log::info!(
            "iteration {k}: risk {:.3e}, change {}, exit fraction {:.3}, {:.1}s",
            diag.risk,
            diag.probe_change.map_or("-".to_string(), |c| format!("{c:.3e}")),
            diag.exit_fraction,
            diag.wall_seconds
        );
        observe(&diag);
        diagnostics.push(diag);
        previous_probes = Some(values);
        fit_model = model.clone();
        current = Some(model);
        if probe_change.is_some_and(|c| c < cfg.tolerance) {
            converged = true;
            break;
        }
    }
    Ok(SolveResult { model: current.expect("at least one iteration"), diagnostics, converged, samples })
}

pub fn policy_iteration(problem: &ControlProblem, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    policy_iteration_with(problem, cfg, |_| {})
}
