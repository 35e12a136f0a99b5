//! Reference solutions: the closed-form eikonal value and a finite
//! difference HJB solver for one-dimensional problems.
//!
//! The FD solver discretizes
//!
//! ```text
//! ½σ² v'' + (b + g α) v' + c + B α² = 0   on Ξ,   v = 0 on E
//! ```
//!
//! with a centered second difference, a centered first difference where
//! that keeps the scheme monotone and an upwind one elsewhere, and a
//! Shortley-Weller stencil next to the exit boundary when it falls between
//! nodes. The control is improved by `α = -g v' / (2B)` until the values
//! stop changing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{Policy, PolicyError};
use crate::problem::{ControlProblem, ExitSet};

/// `max{0, √2 (|1.5 - x| - 0.5)}`, the viscosity solution of `|v'|² = 2`
/// with `v(1) = v(2) = 0`.
pub fn exact_eikonal(x: f64) -> f64 {
    (std::f64::consts::SQRT_2 * ((1.5 - x).abs() - 0.5)).max(0.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdError {
    #[error("finite differences need a one-dimensional problem, got dimension {0}")]
    Dimension(usize),
    #[error("finite differences need a constant scalar diffusion")]
    Diffusion,
    #[error("need at least 3 grid points, got {0}")]
    GridTooSmall(usize),
    #[error("system at iteration {iteration} is not an M-matrix (row {row})")]
    NotMonotone { iteration: usize, row: usize },
    #[error("tridiagonal solve failed at iteration {iteration}")]
    SolveFailed { iteration: usize },
    #[error("policy iteration did not converge in {iterations} iterations (last change {change:.3e})")]
    NotConverged { iterations: usize, change: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeftBoundary {
    /// Zero-flux ghost node `v(-h) = v(h)`, matching reflected paths.
    #[default]
    Reflecting,
    /// `v = 0` at the left end.
    Absorbing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdOptions {
    pub nodes: usize,
    pub left_boundary: LeftBoundary,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Constant control the iteration starts from. Zero is fine whenever
    /// the uncontrolled exit time is finite.
    pub initial_control: f64,
    /// Bound on `|α|`, as for the feedback policies.
    pub u_max: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            nodes: 3000,
            left_boundary: LeftBoundary::Reflecting,
            tolerance: 1e-10,
            max_iterations: 200,
            initial_control: 0.0,
            u_max: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid1D {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Nodes with a Dirichlet condition.
    pub fixed: Vec<bool>,
    /// Centered derivative of `v`.
    pub dv: Vec<f64>,
    /// Control at the nodes, `-g v' / (2B)`.
    pub alpha: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm residual of the discrete HJB at the returned values.
    pub residual: f64,
}

impl Grid1D {
    /// Piecewise-linear interpolation of the values.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        interpolate(&self.x, &self.v, x)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(x >= lo && x <= hi) {
        return None;
    }
    let h = (hi - lo) / (xs.len() - 1) as f64;
    let k = (((x - lo) / h).floor() as usize).min(xs.len() - 2);
    let w = ((x - xs[k]) / h).clamp(0.0, 1.0);
    Some(ys[k] * (1.0 - w) + ys[k + 1] * w)
}

/// Neighbor description of one unknown: spacings and whether each side is
/// a zero Dirichlet value.
#[derive(Clone, Copy)]
struct Stencil {
    hl: f64,
    hr: f64,
    left_zero: bool,
    right_zero: bool,
    /// Node 0 with the reflecting ghost.
    ghost: bool,
}

struct Setup {
    x: Vec<f64>,
    fixed: Vec<bool>,
    stencil: Vec<Option<Stencil>>,
    diffusion: f64,
    g: f64,
    b: f64,
    cost: f64,
    drift: Vec<f64>,
}

fn exit_interval(exit: &ExitSet) -> Option<(f64, f64)> {
    match exit {
        ExitSet::Empty => None,
        ExitSet::Box { lo, hi } => Some((lo[0], hi[0])),
        ExitSet::Ball { center, radius } => Some((center[0] - radius, center[0] + radius)),
    }
}

fn setup(problem: &ControlProblem, opts: &FdOptions) -> Result<Setup, FdError> {
    if problem.state_dim() != 1 || problem.control_dim() != 1 {
        return Err(FdError::Dimension(problem.state_dim()));
    }
    let sigma = problem.sigma_scalar().ok_or(FdError::Diffusion)?;
    let g_count = opts.nodes;
    if g_count < 3 {
        return Err(FdError::GridTooSmall(g_count));
    }
    let (lo, hi) = problem.domain()[0];
    let h = (hi - lo) / (g_count - 1) as f64;
    let x: Vec<f64> = (0..g_count).map(|i| lo + i as f64 * h).collect();
    let mut fixed: Vec<bool> = x.iter().map(|&xi| problem.in_exit(&[xi])).collect();
    if opts.left_boundary == LeftBoundary::Absorbing {
        fixed[0] = true;
    }
    let exit = exit_interval(problem.exit_set());
    let stencil = (0..g_count)
        .map(|i| {
            if fixed[i] {
                return None;
            }
            let mut s = Stencil { hl: h, hr: h, left_zero: false, right_zero: false, ghost: false };
            if i == 0 {
                s.ghost = true;
            } else if fixed[i - 1] {
                s.left_zero = true;
                if let Some((_, e_hi)) = exit.filter(|_| problem.in_exit(&[x[i - 1]])) {
                    s.hl = (x[i] - e_hi).min(h);
                }
            }
            // The right end of Ω, when not in E, reflects like the left one.
            if i + 1 < g_count && fixed[i + 1] {
                s.right_zero = true;
                if let Some((e_lo, _)) = exit {
                    s.hr = (e_lo - x[i]).clamp(f64::MIN_POSITIVE, h);
                }
            }
            Some(s)
        })
        .collect();
    let mut drift = vec![0.0; g_count];
    for (d, &xi) in drift.iter_mut().zip(&x) {
        let mut b = [0.0];
        problem.drift(&[xi], &mut b);
        *d = b[0];
    }
    Ok(Setup {
        x,
        fixed,
        stencil,
        diffusion: 0.5 * sigma * sigma,
        g: problem.control_map()[(0, 0)],
        b: problem.control_cost()[(0, 0)],
        cost: problem.state_cost(&[0.0]),
        drift,
    })
}

/// Row coefficients `(a_l, a_i, a_r)` for drift `f`.
fn row(s: &Stencil, d: f64, f: f64, last: bool) -> (f64, f64, f64) {
    let (hl, hr) = (s.hl, s.hr);
    if s.ghost || last {
        // Mirror node v(x ∓ h) = v(x ± h). The centered slope vanishes; at
        // high Péclet numbers the drift is upwinded one-sided instead.
        let a = 2.0 * d / (hl * hl);
        let c = if 2.0 * d >= f.abs() * hl { a } else { a + f.abs() / hl };
        return if s.ghost { (0.0, -c, c) } else { (c, -c, 0.0) };
    }
    let sum = hl + hr;
    let al = (2.0 * d - f * hr) / (hl * sum);
    let ar = (2.0 * d + f * hl) / (hr * sum);
    if al >= 0.0 && ar >= 0.0 {
        return (al, -(al + ar), ar);
    }
    let (dl, dr) = (2.0 * d / (hl * sum), 2.0 * d / (hr * sum));
    if f > 0.0 {
        (dl, -(dl + dr + f / hr), dr + f / hr)
    } else {
        (dl - f / hl, -(dl + dr - f / hl), dr)
    }
}

fn central_derivative(st: &Setup, v: &[f64], i: usize) -> f64 {
    let Some(s) = st.stencil[i] else { return 0.0 };
    let n = v.len();
    if s.ghost {
        return (v[1] - v[0]) / s.hr;
    }
    if i + 1 == n {
        return (v[i] - v[i - 1]) / s.hl;
    }
    let vl = if s.left_zero { 0.0 } else { v[i - 1] };
    let vr = if s.right_zero { 0.0 } else { v[i + 1] };
    let (hl, hr) = (s.hl, s.hr);
    (hl * hl * (vr - v[i]) + hr * hr * (v[i] - vl)) / (hl * hr * (hl + hr))
}

fn assemble(st: &Setup, alpha: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = st.x.len();
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        match st.stencil[i] {
            None => diag[i] = 1.0,
            Some(s) => {
                let f = st.drift[i] + st.g * alpha[i];
                let (al, ai, ar) = row(&s, st.diffusion, f, i + 1 == n);
                // Dirichlet zeros drop out of the system.
                lower[i] = if s.left_zero { 0.0 } else { al };
                upper[i] = if s.right_zero { 0.0 } else { ar };
                diag[i] = ai;
                rhs[i] = -(st.cost + st.b * alpha[i] * alpha[i]);
            }
        }
    }
    (lower, diag, upper, rhs)
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return None;
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn improve(st: &Setup, v: &[f64], u_max: f64) -> (Vec<f64>, Vec<f64>) {
    let dv: Vec<f64> = (0..v.len()).map(|i| central_derivative(st, v, i)).collect();
    let alpha = dv
        .iter()
        .enumerate()
        .map(|(i, d)| if st.fixed[i] { 0.0 } else { (-st.g * d / (2.0 * st.b)).clamp(-u_max, u_max) })
        .collect();
    (dv, alpha)
}

fn residual(st: &Setup, v: &[f64], alpha: &[f64]) -> f64 {
    let (lower, diag, upper, rhs) = assemble(st, alpha);
    let n = v.len();
    (0..n)
        .filter(|&i| !st.fixed[i])
        .map(|i| {
            let mut r = diag[i] * v[i] - rhs[i];
            if i > 0 {
                r += lower[i] * v[i - 1];
            }
            if i + 1 < n {
                r += upper[i] * v[i + 1];
            }
            r.abs()
        })
        .fold(0.0, f64::max)
}

/// Solves the stationary HJB on a uniform grid over `Ω` by policy
/// iteration on the grid.
pub fn fd_hjb_1d(problem: &ControlProblem, opts: &FdOptions) -> Result<Grid1D, FdError> {
    let st = setup(problem, opts)?;
    let n = st.x.len();
    let mut v = vec![0.0; n];
    let mut alpha: Vec<f64> = st.fixed.iter().map(|&f| if f { 0.0 } else { opts.initial_control }).collect();
    let mut change = f64::INFINITY;
    for iteration in 1..=opts.max_iterations {
        let (lower, diag, upper, rhs) = assemble(&st, &alpha);
        for i in 0..n {
            if st.fixed[i] {
                continue;
            }
            if !(diag[i] < 0.0
                && lower[i] >= 0.0
                && upper[i] >= 0.0
                && -diag[i] >= lower[i] + upper[i] - 1e-12 * diag[i].abs())
            {
                return Err(FdError::NotMonotone { iteration, row: i });
            }
        }
        let v_new = thomas(&lower, &diag, &upper, &rhs).ok_or(FdError::SolveFailed { iteration })?;
        change = v_new.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = v_new;
        let (dv, a) = improve(&st, &v, opts.u_max);
        alpha = a;
        if change < opts.tolerance {
            let res = residual(&st, &v, &alpha);
            return Ok(Grid1D { x: st.x, v, fixed: st.fixed, dv, alpha, iterations: iteration, residual: res });
        }
    }
    Err(FdError::NotConverged { iterations: opts.max_iterations, change })
}

/// Feedback from a grid solution by linear interpolation of the nodal
/// controls.
#[derive(Debug, Clone)]
pub struct GridPolicy {
    x: Vec<f64>,
    alpha: Vec<f64>,
}

impl GridPolicy {
    pub fn new(grid: &Grid1D) -> Self {
        Self { x: grid.x.clone(), alpha: grid.alpha.clone() }
    }
}

impl Policy for GridPolicy {
    type Workspace = ();

    fn workspace(&self) {}

    fn control(&self, x: &[f64], _ws: &mut (), u: &mut [f64]) -> Result<(), PolicyError> {
        u[0] = interpolate(&self.x, &self.alpha, x[0]).ok_or(PolicyError::OutsideGrid {
            x: x[0],
            lo: self.x[0],
            hi: self.x[self.x.len() - 1],
        })?;
        Ok(())
    }
}
