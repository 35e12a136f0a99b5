//! Controlled diffusions with exit sets, and the benchmark catalog.
//!
//! The state follows `dX = (b(X) + g u) dt + σ dW` on a box `Ω` until it
//! enters the closed exit set `E`; the cost rate is `c(x) + uᵀ B u`.

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("control cost matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid exit set: {0}")]
    ExitSet(String),
    #[error("rejection sampling accepted {accepted} of {tried} draws")]
    Rejection { accepted: usize, tried: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Potential {
    Flat,
    /// `Σ κ_i (x_i² - 1)²`.
    DoubleWell {
        kappa: Vec<f64>,
    },
    /// Two deep wells near `(±1, 0)`, a shallow one near `(0, 5/3)` and a
    /// barrier at `(0, 1/3)`.
    ThreeHole,
}

impl Potential {
    pub fn name(&self) -> &'static str {
        match self {
            Potential::Flat => "flat",
            Potential::DoubleWell { .. } => "double-well",
            Potential::ThreeHole => "three-hole",
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Flat => 0.0,
            Potential::DoubleWell { kappa } => kappa.iter().zip(x).map(|(k, &xi)| k * (xi * xi - 1.0).powi(2)).sum(),
            Potential::ThreeHole => {
                let (x1, x2) = (x[0], x[1]);
                let third = 1.0 / 3.0;
                3.0 * (-x1 * x1 - (x2 - third).powi(2)).exp()
                    - 3.0 * (-x1 * x1 - (x2 - 5.0 * third).powi(2)).exp()
                    - 5.0 * (-(x1 - 1.0).powi(2) - x2 * x2).exp()
                    - 5.0 * (-(x1 + 1.0).powi(2) - x2 * x2).exp()
                    + 0.2 * x1.powi(4)
                    + 0.2 * (x2 - third).powi(4)
            }
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Potential::Flat => out.iter_mut().for_each(|v| *v = 0.0),
            Potential::DoubleWell { kappa } => {
                for ((o, k), &xi) in out.iter_mut().zip(kappa).zip(x) {
                    *o = 4.0 * k * xi * (xi * xi - 1.0);
                }
            }
            Potential::ThreeHole => {
                let (x1, x2) = (x[0], x[1]);
                let third = 1.0 / 3.0;
                let e1 = 3.0 * (-x1 * x1 - (x2 - third).powi(2)).exp();
                let e2 = -3.0 * (-x1 * x1 - (x2 - 5.0 * third).powi(2)).exp();
                let e3 = -5.0 * (-(x1 - 1.0).powi(2) - x2 * x2).exp();
                let e4 = -5.0 * (-(x1 + 1.0).powi(2) - x2 * x2).exp();
                out[0] = -2.0 * x1 * (e1 + e2) - 2.0 * (x1 - 1.0) * e3 - 2.0 * (x1 + 1.0) * e4 + 0.8 * x1.powi(3);
                out[1] = -2.0 * (x2 - third) * e1 - 2.0 * (x2 - 5.0 * third) * e2 - 2.0 * x2 * (e3 + e4)
                    + 0.8 * (x2 - third).powi(3);
            }
        }
    }
}

/// Whether the drift descends the potential (`b = -∇pot`) or follows the
/// literal `b = +∇pot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftSign {
    #[default]
    Descent,
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum ExitSet {
    Empty,
    /// Closed box `[lo, hi]`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Closed ball.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl ExitSet {
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ExitSet::Empty => false,
            ExitSet::Box { lo, hi } => x.iter().zip(lo).zip(hi).all(|((&v, &l), &h)| v >= l && v <= h),
            ExitSet::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
            }
        }
    }

    /// Euclidean distance to the set (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ExitSet::Empty => f64::INFINITY,
            ExitSet::Box { lo, hi } => x
                .iter()
                .zip(lo)
                .zip(hi)
                .map(|((&v, &l), &h)| {
                    let d = (l - v).max(v - h).max(0.0);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            ExitSet::Ball { center, radius } => {
                let r = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                (r - radius).max(0.0)
            }
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            ExitSet::Empty => None,
            ExitSet::Box { lo, .. } => Some(lo.len()),
            ExitSet::Ball { center, .. } => Some(center.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlProblem {
    name: String,
    n: usize,
    m: usize,
    potential: Potential,
    drift_sign: DriftSign,
    sigma: DMatrix<f64>,
    /// `Some(s)` when `σ = s I`.
    sigma_scalar: Option<f64>,
    g: DMatrix<f64>,
    state_cost: f64,
    b: DMatrix<f64>,
    /// `-½ B⁻¹ gᵀ`, the map from `∇v` to the feedback control.
    feedback_map: DMatrix<f64>,
    domain: Vec<(f64, f64)>,
    exit: ExitSet,
}

/// Parameters shared by the stochastic benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseOptions {
    pub sigma: f64,
    pub drift_sign: DriftSign,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        Self { sigma: 1.0, drift_sign: DriftSign::Descent }
    }
}

impl ControlProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        potential: Potential,
        drift_sign: DriftSign,
        sigma: DMatrix<f64>,
        g: DMatrix<f64>,
        state_cost: f64,
        b: DMatrix<f64>,
        domain: Vec<(f64, f64)>,
        exit: ExitSet,
    ) -> Result<Self, ProblemError> {
        let n = domain.len();
        if n == 0 {
            return Err(ProblemError::Domain("empty domain".into()));
        }
        if let Some((lo, hi)) = domain.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(ProblemError::Domain(format!("degenerate interval [{lo}, {hi}]")));
        }
        if sigma.shape() != (n, n) {
            return Err(ProblemError::Dimension(format!("sigma is {:?}, state dimension {n}", sigma.shape())));
        }
        if g.nrows() != n {
            return Err(ProblemError::Dimension(format!("g has {} rows, state dimension {n}", g.nrows())));
        }
        let m = g.ncols();
        if b.shape() != (m, m) {
            return Err(ProblemError::Dimension(format!("B is {:?}, control dimension {m}", b.shape())));
        }
        if let Potential::DoubleWell { kappa } = &potential {
            if kappa.len() != n {
                return Err(ProblemError::Dimension(format!("{} well weights for dimension {n}", kappa.len())));
            }
        }
        if potential == Potential::ThreeHole && n != 2 {
            return Err(ProblemError::Dimension("three-hole potential is two dimensional".into()));
        }
        if exit.dim().is_some_and(|d| d != n) {
            return Err(ProblemError::ExitSet("dimension differs from the domain".into()));
        }
        if let ExitSet::Ball { radius, .. } = exit {
            if !(radius > 0.0) {
                return Err(ProblemError::ExitSet("radius must be positive".into()));
            }
        }
        if let ExitSet::Box { lo, hi } = &exit {
            if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                return Err(ProblemError::ExitSet("box has no volume".into()));
            }
        }
        if (b.clone() - b.transpose()).abs().max() > 1e-12 * b.abs().max() {
            return Err(ProblemError::NotPositiveDefinite);
        }
        let chol: Cholesky<f64, Dyn> = b.clone().cholesky().ok_or(ProblemError::NotPositiveDefinite)?;
        let feedback_map = chol.solve(&g.transpose()) * -0.5;
        let sigma_scalar = {
            let s = sigma[(0, 0)];
            let iso = (0..n).all(|i| (0..n).all(|j| sigma[(i, j)] == if i == j { s } else { 0.0 }));
            iso.then_some(s)
        };
        Ok(Self {
            name: name.into(),
            n,
            m,
            potential,
            drift_sign,
            sigma,
            sigma_scalar,
            g,
            state_cost,
            b,
            feedback_map,
            domain,
            exit,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn control_dim(&self) -> usize {
        self.m
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn drift_sign(&self) -> DriftSign {
        self.drift_sign
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn sigma_scalar(&self) -> Option<f64> {
        self.sigma_scalar
    }

    pub fn control_map(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn control_cost(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn exit_set(&self) -> &ExitSet {
        &self.exit
    }

    pub fn state_cost(&self, _x: &[f64]) -> f64 {
        self.state_cost
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma.iter().all(|&v| v == 0.0)
    }

    #[inline]
    pub fn in_exit(&self, x: &[f64]) -> bool {
        self.exit.contains(x)
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.domain).all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Drift `b(x) = ∓∇pot(x)`.
    pub fn drift(&self, x: &[f64], out: &mut [f64]) {
        self.potential.gradient(x, out);
        if self.drift_sign == DriftSign::Descent {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    }

    /// Adds `σ ξ · scale` to `x`.
    pub fn add_noise(&self, xi: &[f64], scale: f64, x: &mut [f64]) {
        match self.sigma_scalar {
            Some(s) => {
                let f = s * scale;
                if f != 0.0 {
                    x.iter_mut().zip(xi).for_each(|(v, e)| *v += f * e);
                }
            }
            None => {
                for (i, v) in x.iter_mut().enumerate() {
                    *v += scale * (0..self.n).map(|j| self.sigma[(i, j)] * xi[j]).sum::<f64>();
                }
            }
        }
    }

    /// Adds `g u · scale` to `x`.
    pub fn add_control(&self, u: &[f64], scale: f64, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v += scale * (0..self.m).map(|j| self.g[(i, j)] * u[j]).sum::<f64>();
        }
    }

    /// `u = -½ B⁻¹ gᵀ ∇v`.
    pub fn feedback_from_gradient(&self, grad: &[f64], u: &mut [f64]) {
        for (k, o) in u.iter_mut().enumerate() {
            *o = (0..self.n).map(|i| self.feedback_map[(k, i)] * grad[i]).sum();
        }
    }

    /// `c(x) + uᵀ B u`.
    pub fn running_cost(&self, x: &[f64], u: &[f64]) -> f64 {
        let mut q = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                q += u[i] * self.b[(i, j)] * u[j];
            }
        }
        self.state_cost(x) + q
    }

    /// Mirrors coordinates that left `Ω` back inside.
    #[inline]
    pub fn reflect(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.domain) {
            if *v < lo {
                *v = 2.0 * lo - *v;
            }
            if *v > hi {
                *v = 2.0 * hi - *v;
            }
            *v = v.clamp(lo, hi);
        }
    }

    /// Uniform samples on `Ξ = Ω \ E`, by rejection from the box.
    pub fn sample_interior<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>, ProblemError> {
        let mut out = Vec::with_capacity(count * self.n);
        let mut x = vec![0.0; self.n];
        let (mut tried, mut accepted) = (0usize, 0usize);
        while accepted < count {
            for (v, &(lo, hi)) in x.iter_mut().zip(&self.domain) {
                *v = rng.random_range(lo..hi);
            }
            tried += 1;
            if !self.in_exit(&x) {
                out.extend_from_slice(&x);
                accepted += 1;
            }
            if tried >= 1000 && (accepted as f64) < 1e-3 * tried as f64 {
                return Err(ProblemError::Rejection { accepted, tried });
            }
        }
        Ok(out)
    }

    /// Uniform samples on the part of `∂E` that borders `Ξ`.
    pub fn sample_exit_boundary<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>, ProblemError> {
        let mut out = Vec::with_capacity(count * self.n);
        let mut x = vec![0.0; self.n];
        let mut tried = 0usize;
        while out.len() < count * self.n {
            tried += 1;
            if tried > 1000 + 1000 * count {
                return Err(ProblemError::Rejection { accepted: out.len() / self.n, tried });
            }
            match &self.exit {
                ExitSet::Empty => return Err(ProblemError::ExitSet("empty exit set has no boundary".into())),
                ExitSet::Ball { center, radius } => {
                    let mut norm = 0.0f64;
                    for v in x.iter_mut() {
                        *v = rng.sample(rand_distr::StandardNormal);
                        norm += *v * *v;
                    }
                    let norm = norm.sqrt();
                    for (v, c) in x.iter_mut().zip(center) {
                        *v = c + radius * *v / norm;
                    }
                    if !self.in_domain(&x) {
                        continue;
                    }
                }
                ExitSet::Box { lo, hi } => {
                    // Pick a face with probability proportional to its area.
                    let side: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
                    let areas: Vec<f64> = (0..self.n)
                        .map(|d| side.iter().enumerate().filter(|(k, _)| *k != d).map(|(_, s)| s).product())
                        .collect();
                    let total: f64 = 2.0 * areas.iter().sum::<f64>();
                    let mut pick = rng.random_range(0.0..total);
                    let mut face = 0;
                    while pick >= 2.0 * areas[face] && face + 1 < self.n {
                        pick -= 2.0 * areas[face];
                        face += 1;
                    }
                    let upper = pick >= areas[face];
                    for (d, v) in x.iter_mut().enumerate() {
                        *v = if d == face {
                            if upper {
                                hi[d]
                            } else {
                                lo[d]
                            }
                        } else {
                            rng.random_range(lo[d]..=hi[d])
                        };
                    }
                    let (dlo, dhi) = self.domain[face];
                    // Faces lying on ∂Ω do not touch Ξ.
                    if !self.in_domain(&x) || x[face] <= dlo || x[face] >= dhi {
                        continue;
                    }
                }
            }
            out.extend_from_slice(&x);
        }
        Ok(out)
    }

    pub fn domain_volume(&self) -> f64 {
        self.domain.iter().map(|(lo, hi)| hi - lo).product()
    }
}

/// Test 1: `ẋ = u` on `[-2, 2]` with exit set `[1, 2]`.
pub fn make_eikonal() -> ControlProblem {
    ControlProblem::new(
        "eikonal",
        Potential::Flat,
        DriftSign::Descent,
        DMatrix::zeros(1, 1),
        DMatrix::identity(1, 1),
        1.0,
        DMatrix::from_element(1, 1, 0.5),
        vec![(-2.0, 2.0)],
        ExitSet::Box { lo: vec![1.0], hi: vec![2.0] },
    )
    .expect("eikonal problem is well formed")
}

fn check_sigma(opts: &NoiseOptions) -> Result<(), ProblemError> {
    if !(opts.sigma.is_finite() && opts.sigma >= 0.0) {
        return Err(ProblemError::Parameter(format!("sigma must be finite and non-negative, got {}", opts.sigma)));
    }
    Ok(())
}

/// Test 2: `pot(x) = 5 (x² - 1)²` on `[-2, 2]`, exit set `[1, 2]`.
pub fn make_double_well_1d(opts: NoiseOptions) -> Result<ControlProblem, ProblemError> {
    check_sigma(&opts)?;
    ControlProblem::new(
        "double-well-1d",
        Potential::DoubleWell { kappa: vec![5.0] },
        opts.drift_sign,
        DMatrix::from_element(1, 1, opts.sigma),
        DMatrix::identity(1, 1),
        1.0,
        DMatrix::from_element(1, 1, 0.5),
        vec![(-2.0, 2.0)],
        ExitSet::Box { lo: vec![1.0], hi: vec![2.0] },
    )
}

/// Local minimum of the three-hole potential near `(-1, 0)`.
pub fn three_hole_target() -> [f64; 2] {
    let pot = Potential::ThreeHole;
    let mut x = [-1.0, 0.0];
    let mut g = [0.0; 2];
    let (mut gp, mut gm) = ([0.0; 2], [0.0; 2]);
    // Newton steps with a finite-difference Hessian of the analytic gradient.
    for _ in 0..50 {
        pot.gradient(&x, &mut g);
        if g[0].hypot(g[1]) < 1e-14 {
            break;
        }
        let h = 1e-6;
        let mut hess = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            pot.gradient(&xp, &mut gp);
            pot.gradient(&xm, &mut gm);
            for i in 0..2 {
                hess[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        let dx0 = (hess[1][1] * g[0] - hess[0][1] * g[1]) / det;
        let dx1 = (hess[0][0] * g[1] - hess[1][0] * g[0]) / det;
        x[0] -= dx0;
        x[1] -= dx1;
    }
    x
}

/// Test 3: three-hole potential on `[-3, 3]²`, exit ball of radius 0.5
/// around the left minimum.
pub fn make_three_hole_2d(opts: NoiseOptions) -> Result<ControlProblem, ProblemError> {
    check_sigma(&opts)?;
    ControlProblem::new(
        "three-hole-2d",
        Potential::ThreeHole,
        opts.drift_sign,
        DMatrix::identity(2, 2) * opts.sigma,
        DMatrix::identity(2, 2),
        1.0,
        DMatrix::identity(2, 2) * 0.5,
        vec![(-3.0, 3.0); 2],
        ExitSet::Ball { center: three_hole_target().to_vec(), radius: 0.5 },
    )
}

/// Test 4: `Σ κ_i (x_i² - 1)²` on `[-π/2, π/2]ⁿ`, exit ball of radius
/// `0.5 √n` around `(1, …, 1)`.
pub fn make_double_well_nd(n: usize, kappa: Vec<f64>, opts: NoiseOptions) -> Result<ControlProblem, ProblemError> {
    check_sigma(&opts)?;
    if n == 0 {
        return Err(ProblemError::Parameter("dimension must be positive".into()));
    }
    if kappa.len() != n {
        return Err(ProblemError::Parameter(format!("{} well weights for dimension {n}", kappa.len())));
    }
    let half = std::f64::consts::FRAC_PI_2;
    ControlProblem::new(
        format!("double-well-{n}d"),
        Potential::DoubleWell { kappa },
        opts.drift_sign,
        DMatrix::identity(n, n) * opts.sigma,
        DMatrix::identity(n, n),
        1.0,
        DMatrix::identity(n, n) * 0.5,
        vec![(-half, half); n],
        ExitSet::Ball { center: vec![1.0; n], radius: 0.5 * (n as f64).sqrt() },
    )
}
