use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use ttpi::config::{ConfigError, ProblemConfig, RunConfig};
use ttpi::iteration::{policy_iteration_with, SolverError};
use ttpi::policy::{ConstantPolicy, FeedbackPolicy, Policy, ZeroPolicy};
use ttpi::problem::ControlProblem;
use ttpi::reference::{exact_eikonal, fd_hjb_1d, GridPolicy};
use ttpi::rng::StreamFactory;
use ttpi::rollout::{evaluate_policy_cost, record_trajectories, CostReport, TrajectoryRow};
use ttpi::selftest::run_selftest;
use ttpi::tensor_train::{read_model, write_model, ValueModel};

use crate::output::{coordinate_names, io_error, unix_now, write_json, write_text, Csv, Metadata};

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: configuration, arguments or files.
    #[error("{0}")]
    Config(String),
    /// The computation itself failed.
    #[error("{0}")]
    Numerical(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(_) | SolverError::Problem(_) | SolverError::Basis(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

struct Context {
    cfg: RunConfig,
    problem: ControlProblem,
    config_path: PathBuf,
    overrides: Vec<String>,
    out: PathBuf,
    threads: usize,
    started: Instant,
    started_unix: u64,
}

impl Context {
    fn load(path: &Path, overrides: &[String], out: Option<PathBuf>, threads: Option<usize>) -> Result<Self, CliError> {
        let cfg = RunConfig::load(path, overrides)?;
        let problem = cfg.problem.build().map_err(|e| CliError::Config(e.to_string()))?;
        let threads = threads.unwrap_or(cfg.threads);
        init_threads(threads)?;
        let out = out.unwrap_or_else(|| cfg.output_dir());
        fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
        Ok(Self {
            cfg,
            problem,
            config_path: path.to_path_buf(),
            overrides: overrides.to_vec(),
            out,
            threads: rayon::current_num_threads(),
            started: Instant::now(),
            started_unix: unix_now(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn streams(&self) -> StreamFactory {
        StreamFactory::new(self.cfg.seed)
    }

    fn model_path(&self, given: Option<PathBuf>) -> PathBuf {
        given.unwrap_or_else(|| self.path("model.json"))
    }

    fn load_model(&self, given: Option<PathBuf>) -> Result<ValueModel, CliError> {
        let path = self.model_path(given);
        let model = read_model(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if model.dim() != self.problem.state_dim() || model.domain() != self.problem.domain() {
            return Err(CliError::Config(format!(
                "model {} does not match problem {}",
                path.display(),
                self.problem.name()
            )));
        }
        Ok(model)
    }

    fn check_start(&self, x0: &[f64]) -> Result<(), CliError> {
        if x0.len() != self.problem.state_dim() {
            return Err(CliError::Config(format!(
                "x0 has {} coordinates, the problem has {}",
                x0.len(),
                self.problem.state_dim()
            )));
        }
        if !self.problem.in_domain(x0) || self.problem.in_exit(x0) {
            return Err(CliError::Config(format!("x0 = {x0:?} is not in the interior of the domain")));
        }
        Ok(())
    }

    fn write_metadata(&self, command: &str, file: &str, summary: serde_json::Value) -> Result<(), CliError> {
        let config = self.cfg.to_toml();
        let meta = Metadata {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_path: self.config_path.display().to_string(),
            overrides: &self.overrides,
            seed: self.cfg.seed,
            threads: self.threads,
            started_unix: self.started_unix,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            config: &config,
            summary: Some(summary),
        };
        write_text(&self.path("config.resolved.toml"), &config)?;
        write_json(&self.path(file), &meta)
    }
}

fn init_threads(threads: usize) -> Result<(), CliError> {
    // A global pool can be built once per process; later calls keep the first.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn solve(
    config: &Path,
    overrides: &[String],
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let ctx = Context::load(config, overrides, out, threads)?;
    let diag_path = ctx.path("diagnostics.jsonl");
    let mut diag_file = fs::File::create(&diag_path).map_err(|e| io_error(&diag_path, e))?;
    let mut write_err = None;
    let result = policy_iteration_with(&ctx.problem, &ctx.cfg.solver, |d| {
        let line = serde_json::to_string(d).expect("diagnostics serialize");
        if let Err(e) = writeln!(diag_file, "{line}").and_then(|_| diag_file.flush()) {
            write_err.get_or_insert(e);
        }
        eprintln!(
            "iteration {:>2}  risk {:.3e}  change {}  exit fraction {:.3}  {:.1}s",
            d.iteration,
            d.risk,
            d.probe_change.map_or("   -     ".into(), |c| format!("{c:.3e}")),
            d.exit_fraction,
            d.wall_seconds
        );
    })?;
    if let Some(e) = write_err {
        return Err(io_error(&diag_path, e));
    }
    let model_path = ctx.path("model.json");
    write_model(&result.model, &model_path).map_err(numerical)?;
    let x0 = ctx.cfg.evaluation_start();
    let predicted = result.model.eval(&x0).ok();
    let last = result.diagnostics.last().expect("at least one iteration");
    let summary = json!({
        "converged": result.converged,
        "iterations": result.diagnostics.len(),
        "samples": result.samples,
        "parameters": result.model.tt().num_params(),
        "ranks": result.model.tt().ranks(),
        "final_risk": last.risk,
        "x0": x0,
        "predicted_value": predicted,
    });
    ctx.write_metadata("solve", "metadata.json", summary)?;
    say!(
        "{} after {} iterations, {} parameters, model written to {}",
        if result.converged { "converged" } else { "stopped" },
        result.diagnostics.len(),
        result.model.tt().num_params(),
        model_path.display()
    );
    if let Some(v) = predicted {
        say!("v({x0:?}) = {v:.6}");
    }
    Ok(())
}

fn report_json(report: &CostReport) -> serde_json::Value {
    serde_json::to_value(report).expect("report serializes")
}

pub fn evaluate(
    config: &Path,
    overrides: &[String],
    out: Option<PathBuf>,
    threads: Option<usize>,
    model: Option<PathBuf>,
    x0: Option<Vec<f64>>,
    trajectories: Option<usize>,
) -> Result<(), CliError> {
    let ctx = Context::load(config, overrides, out, threads)?;
    let model = ctx.load_model(model)?;
    let x0 = x0.unwrap_or_else(|| ctx.cfg.evaluation_start());
    ctx.check_start(&x0)?;
    let count = trajectories.unwrap_or(ctx.cfg.evaluate.trajectories);
    let predicted = model.eval(&x0).map_err(numerical)?;
    say!("predicted cost v(x0) = {predicted:.6}");
    let report = if count > 0 {
        let policy = FeedbackPolicy::new(&ctx.problem, &model, ctx.cfg.solver.u_max);
        let r = evaluate_policy_cost(&ctx.problem, &policy, &x0, count, &ctx.cfg.solver.rollout, &ctx.streams())
            .map_err(numerical)?;
        match (r.mean_cost, r.std_error) {
            (Some(m), Some(s)) => say!("realized cost = {m:.6} ± {s:.6} (standard error)"),
            _ => say!("realized cost unavailable: no path exited"),
        }
        say!("exit fraction = {:.4} of {} trajectories", r.exit_fraction, r.trajectories);
        if let Some(t) = r.median_exit_time {
            say!("median exit time = {t:.4}");
        }
        Some(r)
    } else {
        None
    };
    let result = json!({
        "x0": x0,
        "predicted": predicted,
        "realized": report.as_ref().map(report_json),
    });
    write_json(&ctx.path("evaluation.json"), &result)?;
    ctx.write_metadata("evaluate", "evaluation.metadata.json", result)
}

pub fn reference(
    config: &Path,
    overrides: &[String],
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    let ctx = Context::load(config, overrides, out, threads)?;
    if ctx.problem.state_dim() != 1 {
        return Err(CliError::Config(format!(
            "reference solutions exist only for one-dimensional problems, {} has dimension {}",
            ctx.problem.name(),
            ctx.problem.state_dim()
        )));
    }
    let path = ctx.path("reference.csv");
    let summary = if let ProblemConfig::Eikonal {} = ctx.cfg.problem {
        let nodes = ctx.cfg.reference.nodes.max(2);
        let (lo, hi) = ctx.problem.domain()[0];
        let mut csv = Csv::create(&path, &["x".into(), "v".into()])?;
        for i in 0..nodes {
            let x = lo + (hi - lo) * i as f64 / (nodes - 1) as f64;
            csv.numbers(&[x, exact_eikonal(x)])?;
        }
        csv.finish()?;
        json!({ "kind": "closed-form", "nodes": nodes })
    } else {
        let grid = fd_hjb_1d(&ctx.problem, &ctx.cfg.reference).map_err(numerical)?;
        let mut csv = Csv::create(&path, &["x".into(), "v".into(), "dv".into(), "u".into()])?;
        for i in 0..grid.x.len() {
            csv.numbers(&[grid.x[i], grid.v[i], grid.dv[i], grid.alpha[i]])?;
        }
        csv.finish()?;
        let x0 = ctx.cfg.evaluation_start();
        json!({
            "kind": "finite-differences",
            "nodes": grid.x.len(),
            "iterations": grid.iterations,
            "residual": grid.residual,
            "x0": x0,
            "value_at_x0": grid.value_at(x0[0]),
        })
    };
    say!("reference written to {}", path.display());
    ctx.write_metadata("reference", "reference.metadata.json", summary)
}

fn write_trajectory(path: &Path, rows: &[TrajectoryRow], n: usize, m: usize) -> Result<(), CliError> {
    let mut header = vec!["t".to_string()];
    header.extend(coordinate_names("x", n));
    header.extend(coordinate_names("u", m));
    header.extend(["cost".to_string(), "exited".to_string()]);
    let mut csv = Csv::create(path, &header)?;
    for r in rows {
        let mut f = vec![r.t.to_string()];
        f.extend(r.x.iter().map(|v| v.to_string()));
        f.extend(r.u.iter().map(|v| v.to_string()));
        f.push(r.cost.to_string());
        f.push(u8::from(r.exited).to_string());
        csv.row(&f)?;
    }
    csv.finish()
}

fn cost_row<P: Policy>(
    ctx: &Context,
    csv: &mut Csv,
    name: &str,
    predicted: Option<f64>,
    policy: &P,
    x0: &[f64],
) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let r = evaluate_policy_cost(
        &ctx.problem,
        policy,
        x0,
        cfg.plotdata.cost_trajectories,
        &cfg.solver.rollout,
        &ctx.streams(),
    )
    .map_err(numerical)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    csv.row(&[
        name.to_string(),
        opt(predicted),
        opt(r.mean_cost),
        opt(r.std_error),
        r.exit_fraction.to_string(),
        r.trajectories.to_string(),
    ])
}

pub fn plotdata(
    config: &Path,
    overrides: &[String],
    out: Option<PathBuf>,
    threads: Option<usize>,
    model: Option<PathBuf>,
) -> Result<(), CliError> {
    let ctx = Context::load(config, overrides, out, threads)?;
    let model = ctx.load_model(model)?;
    let problem = &ctx.problem;
    let opts = &ctx.cfg.plotdata;
    let (n, m) = (problem.state_dim(), problem.control_dim());
    let dom = problem.domain().to_vec();
    let x0 = ctx.cfg.plot_start();
    ctx.check_start(&x0)?;
    let grid = opts.grid.max(2);
    let axis = |d: usize, i: usize| dom[d].0 + (dom[d].1 - dom[d].0) * i as f64 / (grid - 1) as f64;
    let mut files = Vec::new();

    // Value function: a curve in 1D, a surface in 2D, the diagonal otherwise.
    let fd = match ctx.cfg.problem {
        ProblemConfig::DoubleWell1d { .. } => Some(fd_hjb_1d(problem, &ctx.cfg.reference).map_err(numerical)?),
        _ => None,
    };
    match n {
        1 => {
            let path = ctx.path("values.csv");
            let mut csv = Csv::create(&path, &["x".into(), "v_model".into(), "v_reference".into()])?;
            for i in 0..grid {
                let x = axis(0, i);
                let reference = match (&ctx.cfg.problem, &fd) {
                    (ProblemConfig::Eikonal {}, _) => Some(exact_eikonal(x)),
                    (_, Some(g)) => g.value_at(x),
                    _ => None,
                };
                let v = model.eval(&[x]).map_err(numerical)?;
                csv.row(&[x.to_string(), v.to_string(), reference.map_or(String::new(), |r| r.to_string())])?;
            }
            csv.finish()?;
            files.push(path);
        }
        2 => {
            let path = ctx.path("value_grid.csv");
            let mut csv = Csv::create(&path, &["x1".into(), "x2".into(), "v".into(), "in_exit".into()])?;
            for i in 0..grid {
                for j in 0..grid {
                    let x = [axis(0, i), axis(1, j)];
                    let v = model.eval(&x).map_err(numerical)?;
                    csv.numbers(&[x[0], x[1], v, f64::from(u8::from(problem.in_exit(&x)))])?;
                }
            }
            csv.finish()?;
            files.push(path);
        }
        _ => {
            let path = ctx.path("value_diagonal.csv");
            let mut csv = Csv::create(&path, &["s".into(), "v".into(), "in_exit".into()])?;
            let (lo, hi) =
                dom.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |acc, d| (acc.0.max(d.0), acc.1.min(d.1)));
            for i in 0..grid {
                let s = lo + (hi - lo) * i as f64 / (grid - 1) as f64;
                let x = vec![s; n];
                let v = model.eval(&x).map_err(numerical)?;
                csv.numbers(&[s, v, f64::from(u8::from(problem.in_exit(&x)))])?;
            }
            csv.finish()?;
            files.push(path);
        }
    }

    // Predicted against realized cost for each available controller.
    let feedback = FeedbackPolicy::new(problem, &model, ctx.cfg.solver.u_max);
    let path = ctx.path("costs.csv");
    let header = ["controller", "predicted", "realized", "std_error", "exit_fraction", "trajectories"];
    let mut csv = Csv::create(&path, &header.map(String::from))?;
    cost_row(&ctx, &mut csv, "tensor-train", Some(model.eval(&x0).map_err(numerical)?), &feedback, &x0)?;
    if let Some(g) = &fd {
        cost_row(&ctx, &mut csv, "finite-differences", g.value_at(x0[0]), &GridPolicy::new(g), &x0)?;
    }
    if let ProblemConfig::Eikonal {} = ctx.cfg.problem {
        cost_row(&ctx, &mut csv, "exact", Some(exact_eikonal(x0[0])), &ConstantPolicy(vec![2f64.sqrt()]), &x0)?;
    }
    cost_row(&ctx, &mut csv, "uncontrolled", None, &ZeroPolicy, &x0)?;
    csv.finish()?;
    files.push(path);

    // Sample paths and their distance to the exit set.
    let traj_dir = ctx.path("trajectories");
    fs::create_dir_all(&traj_dir).map_err(|e| io_error(&traj_dir, e))?;
    let rollout = &ctx.cfg.solver.rollout;
    let streams = ctx.streams();
    let count = opts.trajectories.max(opts.distance_paths);
    let controlled =
        record_trajectories(problem, &feedback, &x0, count, rollout, opts.stride, &streams).map_err(numerical)?;
    let free =
        record_trajectories(problem, &ZeroPolicy, &x0, count, rollout, opts.stride, &streams).map_err(numerical)?;
    for (label, paths) in [("controlled", &controlled), ("uncontrolled", &free)] {
        for (j, rows) in paths.iter().take(opts.trajectories).enumerate() {
            let path = traj_dir.join(format!("{label}_{j:03}.csv"));
            write_trajectory(&path, rows, n, m)?;
        }
    }
    let path = ctx.path("distance.csv");
    let mut csv = Csv::create(&path, &["controller", "path", "t", "distance"].map(String::from))?;
    for (label, paths) in [("controlled", &controlled), ("uncontrolled", &free)] {
        for (j, rows) in paths.iter().take(opts.distance_paths).enumerate() {
            for r in rows {
                let d = problem.exit_set().distance(&r.x);
                csv.row(&[label.to_string(), j.to_string(), r.t.to_string(), d.to_string()])?;
            }
        }
    }
    csv.finish()?;
    files.push(path);
    files.push(traj_dir);

    for f in &files {
        say!("wrote {}", f.display());
    }
    let listed: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
    ctx.write_metadata("plotdata", "plotdata.metadata.json", json!({ "files": listed, "x0": x0 }))
}

pub fn selftest(threads: Option<usize>) -> Result<(), CliError> {
    init_threads(threads.unwrap_or(0))?;
    let checks = run_selftest();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        say!("{} {:width$}  {} ({:.2}s)", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail, c.seconds);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        say!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{failed} of {} checks failed", checks.len())))
    }
}
