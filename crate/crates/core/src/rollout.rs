//! Euler-Maruyama simulation of controlled paths with absorbing exit.
//!
//! A path stops at the first step that lands in `E`: its state is frozen
//! and no further cost accrues. The running cost is integrated with the
//! trapezoid rule on the step grid. With [`ExitRule::Bisect`] the final
//! step is cut at the crossing point found by bisection along the step
//! segment, so the last trapezoid covers only the part of the step spent
//! in `Ξ`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{Policy, PolicyError};
use crate::problem::ControlProblem;
use crate::rng::{Purpose, StreamFactory};
use crate::tensor_train::{ModelError, Successors, ValueModel};

const BISECTION_STEPS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RolloutError {
    #[error("initial state {index} lies in the exit set")]
    StartInExit { index: usize },
    #[error("initial state {index} has the wrong dimension or is not finite")]
    BadStart { index: usize },
    #[error("path {path} became non-finite at step {step}")]
    BlowUp { path: usize, step: usize },
    #[error("invalid rollout configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitRule {
    /// Cut the exit step at the boundary crossing.
    #[default]
    Bisect,
    /// Charge the full exit step and stop at the post-step state.
    FullStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RolloutConfig {
    pub dt: f64,
    /// Horizon of the regression rollouts.
    pub tau: f64,
    /// Paths per initial state.
    pub repetitions: usize,
    /// Horizon of evaluation runs.
    pub t_max: f64,
    pub exit_rule: ExitRule,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self { dt: 1e-3, tau: 0.1, repetitions: 1000, t_max: 10.0, exit_rule: ExitRule::Bisect }
    }
}

impl RolloutConfig {
    fn steps_for(&self, horizon: f64, what: &str) -> Result<usize, RolloutError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(RolloutError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        let k = horizon / self.dt;
        let steps = k.round();
        if !(steps >= 1.0) || (k - steps).abs() > 1e-9 * k.max(1.0) {
            return Err(RolloutError::Config(format!(
                "{what} = {horizon} is not a positive multiple of dt = {}",
                self.dt
            )));
        }
        Ok(steps as usize)
    }

    pub fn steps(&self) -> Result<usize, RolloutError> {
        self.steps_for(self.tau, "tau")
    }

    pub fn eval_steps(&self) -> Result<usize, RolloutError> {
        self.steps_for(self.t_max, "t_max")
    }

    pub fn validate(&self) -> Result<(), RolloutError> {
        self.steps()?;
        self.eval_steps()?;
        if self.repetitions == 0 {
            return Err(RolloutError::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub cost: f64,
    pub exited: bool,
    /// Steps taken, including a cut exit step.
    pub steps: usize,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub cost: f64,
    pub exited: bool,
}

struct Scratch {
    u: Vec<f64>,
    u_new: Vec<f64>,
    drift: Vec<f64>,
    xi: Vec<f64>,
    x_new: Vec<f64>,
    probe: Vec<f64>,
}

impl Scratch {
    fn new(n: usize, m: usize) -> Self {
        Self {
            u: vec![0.0; m],
            u_new: vec![0.0; m],
            drift: vec![0.0; n],
            xi: vec![0.0; n],
            x_new: vec![0.0; n],
            probe: vec![0.0; n],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_path<P: Policy>(
    problem: &ControlProblem,
    policy: &P,
    ws: &mut P::Workspace,
    sc: &mut Scratch,
    x: &mut [f64],
    steps: usize,
    dt: f64,
    rule: ExitRule,
    rng: &mut ChaCha8Rng,
    path: usize,
    mut record: Option<(&mut Vec<TrajectoryRow>, usize)>,
) -> Result<PathOutcome, RolloutError> {
    let sqrt_dt = dt.sqrt();
    let noisy = !problem.is_deterministic();
    policy.control(x, ws, &mut sc.u)?;
    let mut r = problem.running_cost(x, &sc.u);
    let mut cost = 0.0;
    let mut time = 0.0;
    if let Some((rows, _)) = record.as_mut() {
        rows.push(TrajectoryRow { t: 0.0, x: x.to_vec(), u: sc.u.clone(), cost: 0.0, exited: false });
    }
    for k in 0..steps {
        problem.drift(x, &mut sc.drift);
        sc.x_new.copy_from_slice(x);
        for (xn, b) in sc.x_new.iter_mut().zip(&sc.drift) {
            *xn += b * dt;
        }
        problem.add_control(&sc.u, dt, &mut sc.x_new);
        if noisy {
            for e in sc.xi.iter_mut() {
                *e = rng.sample(StandardNormal);
            }
            problem.add_noise(&sc.xi, sqrt_dt, &mut sc.x_new);
        }
        if sc.x_new.iter().any(|v| !v.is_finite()) {
            return Err(RolloutError::BlowUp { path, step: k + 1 });
        }
        problem.reflect(&mut sc.x_new);
        if problem.in_exit(&sc.x_new) {
            let theta = match rule {
                ExitRule::FullStep => 1.0,
                ExitRule::Bisect => {
                    let (mut lo, mut hi) = (0.0f64, 1.0f64);
                    for _ in 0..BISECTION_STEPS {
                        let mid = 0.5 * (lo + hi);
                        for ((p, a), b) in sc.probe.iter_mut().zip(x.iter()).zip(&sc.x_new) {
                            *p = a + mid * (b - a);
                        }
                        if problem.in_exit(&sc.probe) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    hi
                }
            };
            if theta < 1.0 {
                for ((p, a), b) in sc.probe.iter_mut().zip(x.iter()).zip(&sc.x_new) {
                    *p = a + theta * (b - a);
                }
                // Guard against rounding taking the cut point back out of E.
                if problem.in_exit(&sc.probe) {
                    sc.x_new.copy_from_slice(&sc.probe);
                }
            }
            policy.control(&sc.x_new, ws, &mut sc.u_new)?;
            let r_exit = problem.running_cost(&sc.x_new, &sc.u_new);
            cost += 0.5 * theta * dt * (r + r_exit);
            time += theta * dt;
            x.copy_from_slice(&sc.x_new);
            if let Some((rows, _)) = record.as_mut() {
                rows.push(TrajectoryRow { t: time, x: x.to_vec(), u: sc.u_new.clone(), cost, exited: true });
            }
            return Ok(PathOutcome { cost, exited: true, steps: k + 1, time });
        }
        policy.control(&sc.x_new, ws, &mut sc.u_new)?;
        let r_new = problem.running_cost(&sc.x_new, &sc.u_new);
        cost += 0.5 * dt * (r + r_new);
        time += dt;
        r = r_new;
        x.copy_from_slice(&sc.x_new);
        std::mem::swap(&mut sc.u, &mut sc.u_new);
        if let Some((rows, stride)) = record.as_mut() {
            if (k + 1) % *stride == 0 || k + 1 == steps {
                rows.push(TrajectoryRow { t: time, x: x.to_vec(), u: sc.u.clone(), cost, exited: false });
            }
        }
    }
    Ok(PathOutcome { cost, exited: false, steps, time })
}

fn check_starts(problem: &ControlProblem, x0: &[f64]) -> Result<usize, RolloutError> {
    let n = problem.state_dim();
    if !x0.len().is_multiple_of(n) {
        return Err(RolloutError::BadStart { index: x0.len() / n });
    }
    for (i, x) in x0.chunks(n).enumerate() {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(RolloutError::BadStart { index: i });
        }
        if problem.in_exit(x) {
            return Err(RolloutError::StartInExit { index: i });
        }
    }
    Ok(x0.len() / n)
}

/// Results of `N × M` regression rollouts, indexed by `i * M + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBatch {
    pub dim: usize,
    pub samples: usize,
    pub repetitions: usize,
    pub stops: Vec<f64>,
    pub costs: Vec<f64>,
    pub exited: Vec<bool>,
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
}

impl RolloutBatch {
    pub fn stop(&self, p: usize) -> &[f64] {
        &self.stops[p * self.dim..(p + 1) * self.dim]
    }

    pub fn exit_fraction(&self) -> f64 {
        self.exited.iter().filter(|&&e| e).count() as f64 / self.exited.len().max(1) as f64
    }

    /// Mean path cost per initial state.
    pub fn mean_costs(&self) -> Vec<f64> {
        self.costs.chunks(self.repetitions).map(|c| c.iter().sum::<f64>() / self.repetitions as f64).collect()
    }

    /// Non-exited stopped states as successor points with weight `1/M`.
    pub fn successors(&self) -> Successors {
        let mut offsets = vec![0];
        let mut points = Vec::new();
        let mut coefs = Vec::new();
        let w = 1.0 / self.repetitions as f64;
        for i in 0..self.samples {
            for j in 0..self.repetitions {
                let p = i * self.repetitions + j;
                if !self.exited[p] {
                    points.extend_from_slice(self.stop(p));
                    coefs.push(w);
                }
            }
            offsets.push(coefs.len());
        }
        Successors { offsets, points, coefs }
    }
}

/// Simulates `M` paths of horizon `τ` from every initial state.
///
/// Path `(i, j)` draws from stream `i * M + j` of
/// `(seed, Rollout, round)`, so results do not depend on thread count.
pub fn simulate_paths<P: Policy>(
    problem: &ControlProblem,
    policy: &P,
    x0: &[f64],
    cfg: &RolloutConfig,
    streams: &StreamFactory,
    round: u64,
) -> Result<RolloutBatch, RolloutError> {
    cfg.validate()?;
    let samples = check_starts(problem, x0)?;
    let (n, m) = (problem.state_dim(), problem.control_dim());
    let reps = cfg.repetitions;
    let steps = cfg.steps()?;
    let total = samples * reps;
    let mut stops = vec![0.0; total * n];
    let outcomes: Vec<PathOutcome> = stops
        .par_chunks_mut(n)
        .enumerate()
        .map_init(
            || (policy.workspace(), Scratch::new(n, m)),
            |(ws, sc), (p, x)| {
                let i = p / reps;
                x.copy_from_slice(&x0[i * n..(i + 1) * n]);
                let mut rng = streams.stream(Purpose::Rollout, round, p as u64);
                run_path(problem, policy, ws, sc, x, steps, cfg.dt, cfg.exit_rule, &mut rng, p, None)
            },
        )
        .collect::<Result<_, _>>()?;
    Ok(RolloutBatch {
        dim: n,
        samples,
        repetitions: reps,
        stops,
        costs: outcomes.iter().map(|o| o.cost).collect(),
        exited: outcomes.iter().map(|o| o.exited).collect(),
        steps: outcomes.iter().map(|o| o.steps).collect(),
        times: outcomes.iter().map(|o| o.time).collect(),
    })
}

/// `y_i = (1/M) Σ_j [cost_ij + (exited ? 0 : v(stop_ij))]`; `v ≡ 0` when no
/// model is given.
pub fn make_targets(batch: &RolloutBatch, model: Option<&ValueModel>) -> Result<Vec<f64>, RolloutError> {
    let mut per_path = batch.costs.clone();
    if let Some(model) = model {
        let eval = model.evaluator();
        let values: Vec<f64> = (0..per_path.len())
            .into_par_iter()
            .map_init(
                || eval.workspace(),
                |ws, p| if batch.exited[p] { Ok(0.0) } else { eval.value(batch.stop(p), ws) },
            )
            .collect::<Result<_, _>>()?;
        per_path.iter_mut().zip(values).for_each(|(c, v)| *c += v);
    }
    let reps = batch.repetitions as f64;
    Ok(per_path.chunks(batch.repetitions).map(|c| c.iter().sum::<f64>() / reps).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub trajectories: usize,
    pub exited: usize,
    pub exit_fraction: f64,
    /// Mean total cost over the paths that exited before `t_max`.
    pub mean_cost: Option<f64>,
    pub std_error: Option<f64>,
    pub mean_exit_time: Option<f64>,
    /// Median over all paths, counting non-exited ones as never exiting.
    pub median_exit_time: Option<f64>,
}

/// Runs `n_traj` paths from `x0` until exit or `t_max`.
pub fn evaluate_policy_cost<P: Policy>(
    problem: &ControlProblem,
    policy: &P,
    x0: &[f64],
    n_traj: usize,
    cfg: &RolloutConfig,
    streams: &StreamFactory,
) -> Result<CostReport, RolloutError> {
    check_starts(problem, x0)?;
    if x0.len() != problem.state_dim() {
        return Err(RolloutError::BadStart { index: 0 });
    }
    let steps = cfg.eval_steps()?;
    let (n, m) = (problem.state_dim(), problem.control_dim());
    let outcomes: Vec<PathOutcome> = (0..n_traj)
        .into_par_iter()
        .map_init(
            || (policy.workspace(), Scratch::new(n, m), vec![0.0; n]),
            |(ws, sc, x), j| {
                x.copy_from_slice(x0);
                let mut rng = streams.stream(Purpose::Evaluation, 0, j as u64);
                run_path(problem, policy, ws, sc, x, steps, cfg.dt, cfg.exit_rule, &mut rng, j, None)
            },
        )
        .collect::<Result<_, _>>()?;
    Ok(summarize(&outcomes))
}

fn summarize(outcomes: &[PathOutcome]) -> CostReport {
    let exited: Vec<&PathOutcome> = outcomes.iter().filter(|o| o.exited).collect();
    let k = exited.len();
    let mean = (k > 0).then(|| exited.iter().map(|o| o.cost).sum::<f64>() / k as f64);
    let std_error = mean.map(|mu| {
        if k < 2 {
            0.0
        } else {
            let var = exited.iter().map(|o| (o.cost - mu).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        }
    });
    let mean_exit_time = (k > 0).then(|| exited.iter().map(|o| o.time).sum::<f64>() / k as f64);
    let mut times: Vec<f64> = outcomes.iter().map(|o| if o.exited { o.time } else { f64::INFINITY }).collect();
    times.sort_by(|a, b| a.total_cmp(b));
    let median = if times.is_empty() {
        None
    } else if times.len() % 2 == 1 {
        Some(times[times.len() / 2])
    } else {
        Some(0.5 * (times[times.len() / 2 - 1] + times[times.len() / 2]))
    };
    CostReport {
        trajectories: outcomes.len(),
        exited: k,
        exit_fraction: k as f64 / outcomes.len().max(1) as f64,
        mean_cost: mean,
        std_error,
        mean_exit_time,
        median_exit_time: median.filter(|m| m.is_finite()),
    }
}

/// Records `count` full paths from `x0`, keeping every `stride`-th step.
pub fn record_trajectories<P: Policy>(
    problem: &ControlProblem,
    policy: &P,
    x0: &[f64],
    count: usize,
    cfg: &RolloutConfig,
    stride: usize,
    streams: &StreamFactory,
) -> Result<Vec<Vec<TrajectoryRow>>, RolloutError> {
    check_starts(problem, x0)?;
    let steps = cfg.eval_steps()?;
    let (n, m) = (problem.state_dim(), problem.control_dim());
    (0..count)
        .into_par_iter()
        .map_init(
            || (policy.workspace(), Scratch::new(n, m)),
            |(ws, sc), j| {
                let mut x = x0.to_vec();
                let mut rows = Vec::new();
                let mut rng = streams.stream(Purpose::Trajectory, 0, j as u64);
                run_path(
                    problem,
                    policy,
                    ws,
                    sc,
                    &mut x,
                    steps,
                    cfg.dt,
                    cfg.exit_rule,
                    &mut rng,
                    j,
                    Some((&mut rows, stride.max(1))),
                )?;
                Ok(rows)
            },
        )
        .collect()
}
