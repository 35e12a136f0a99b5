//! Alternating least squares with an adaptive ridge.
//!
//! Each core update minimizes
//!
//! ```text
//! (1/W) Σ_i w_i (v(x_i) - y_i)^2 + δ ‖A‖_F^2
//! ```
//!
//! over the entries of one core while the others are held fixed. The train
//! is kept in canonical form around the updated core, so `‖A‖_F` equals the
//! norm of that core and the local problem is an ordinary ridge regression.
//!
//! With [`Successors`] attached the update instead solves the projected
//! fixed point `v(x_i) = y_i + Σ_j c_ij v(x'_ij)` in the least-squares sense
//! of the local subspace (the LSTD system), which is not symmetric.

use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Canonical, Core, ModelError, TensorTrain, ValueModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlsError {
    #[error("local system of core {core} is singular")]
    SingularSystem { core: usize },
    #[error("non-finite target at sample {index}")]
    NonFiniteTarget { index: usize },
    #[error("invalid regression data: {0}")]
    Data(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Successor states for the projected fixed-point system.
///
/// Sample `i` owns the successor points `offsets[i]..offsets[i+1]`, each
/// carrying a coefficient (typically `1/M` for paths that did not exit).
#[derive(Debug, Clone, PartialEq)]
pub struct Successors {
    pub offsets: Vec<usize>,
    pub points: Vec<f64>,
    pub coefs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    dim: usize,
    points: Vec<f64>,
    targets: Vec<f64>,
    weights: Option<Vec<f64>>,
    successors: Option<Successors>,
}

impl RegressionData {
    /// `points` is row-major `N × dim`.
    pub fn new(dim: usize, points: Vec<f64>, targets: Vec<f64>) -> Result<Self, AlsError> {
        if dim == 0 {
            return Err(AlsError::Data("dimension must be positive".into()));
        }
        if targets.is_empty() {
            return Err(AlsError::Data("need at least one sample".into()));
        }
        if points.len() != dim * targets.len() {
            return Err(AlsError::Data(format!(
                "{} coordinates for {} samples of dimension {dim}",
                points.len(),
                targets.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(AlsError::Data("non-finite sample point".into()));
        }
        if let Some(index) = targets.iter().position(|v| !v.is_finite()) {
            return Err(AlsError::NonFiniteTarget { index });
        }
        Ok(Self { dim, points, targets, weights: None, successors: None })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, AlsError> {
        if weights.len() != self.len() {
            return Err(AlsError::Data("weight count differs from sample count".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
            return Err(AlsError::Data("weights must be non-negative with positive sum".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_successors(mut self, s: Successors) -> Result<Self, AlsError> {
        if s.offsets.len() != self.len() + 1 || s.offsets[0] != 0 || s.offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(AlsError::Data("successor offsets malformed".into()));
        }
        let total = *s.offsets.last().unwrap();
        if s.coefs.len() != total || s.points.len() != total * self.dim {
            return Err(AlsError::Data("successor arrays have inconsistent lengths".into()));
        }
        if s.points.iter().chain(&s.coefs).any(|v| !v.is_finite()) {
            return Err(AlsError::Data("non-finite successor data".into()));
        }
        self.successors = Some(s);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn successors(&self) -> Option<&Successors> {
        self.successors.as_ref()
    }

    fn normalized_weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => {
                let total: f64 = w.iter().sum();
                w.iter().map(|v| v / total).collect()
            }
            None => vec![1.0 / self.len() as f64; self.len()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RidgePolicy {
    /// `δ = max(scale · risk, floor)`, reset at the start of every sweep.
    Adaptive {
        scale: f64,
        floor: f64,
    },
    Fixed {
        delta: f64,
    },
}

impl Default for RidgePolicy {
    fn default() -> Self {
        RidgePolicy::Adaptive { scale: 1.0, floor: 1e-12 }
    }
}

impl RidgePolicy {
    pub fn delta(&self, risk: f64) -> f64 {
        match *self {
            RidgePolicy::Adaptive { scale, floor } => (scale * risk).max(floor),
            RidgePolicy::Fixed { delta } => delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlsConfig {
    pub sweeps: usize,
    pub ridge: RidgePolicy,
}

impl Default for AlsConfig {
    fn default() -> Self {
        Self { sweeps: 3, ridge: RidgePolicy::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlsReport {
    /// δ used in each sweep.
    pub deltas: Vec<f64>,
    /// Empirical risk after each core update.
    pub risks: Vec<f64>,
    /// Regularized objective after each core update.
    pub objectives: Vec<f64>,
    pub initial_risk: f64,
    pub final_risk: f64,
}

#[derive(Debug, Clone)]
pub struct AlsFit {
    pub model: ValueModel,
    pub report: AlsReport,
}

/// Per-sample contraction stacks for one point set.
struct Stacks {
    /// `feats[d]` is `N × m_d`, basis values of coordinate `d`.
    feats: Vec<Vec<f64>>,
    /// `left[d]` is `N × r_{d-1}`: contraction of cores `< d`.
    left: Vec<Vec<f64>>,
    /// `right[d]` is `N × r_{d-1}`: contraction of cores `≥ d`.
    right: Vec<Vec<f64>>,
    len: usize,
}

impl Stacks {
    fn new(model: &ValueModel, points: &[f64], len: usize) -> Result<Self, ModelError> {
        let n = model.dim();
        let feats = (0..n)
            .map(|d| {
                let m = model.bases()[d].dim();
                let mut f = vec![0.0; len * m];
                f.par_chunks_mut(m)
                    .enumerate()
                    .try_for_each(|(i, row)| model.features(d, points[i * n + d], row))
                    .map(|_| f)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { feats, left: vec![Vec::new(); n + 1], right: vec![Vec::new(); n + 1], len })
    }

    fn init(&mut self, tt: &TensorTrain) {
        let n = tt.order();
        self.left[0] = vec![1.0; self.len];
        self.right[n] = vec![1.0; self.len];
        for d in (1..n).rev() {
            self.update_right(tt.core(d), d);
        }
    }

    /// `left[d+1] = left[d] · Q_d(x)`.
    fn update_left(&mut self, core: &Core, d: usize) {
        let (l, m, r) = (core.left(), core.mode(), core.right());
        let feats = &self.feats[d];
        let src = &self.left[d];
        let mut out = vec![0.0; self.len * r];
        out.par_chunks_mut(r).enumerate().for_each(|(i, dst)| {
            let f = &feats[i * m..(i + 1) * m];
            let lv = &src[i * l..(i + 1) * l];
            for (a, &la) in lv.iter().enumerate() {
                for (k, &fk) in f.iter().enumerate() {
                    let w = la * fk;
                    let row = &core.data()[(a * m + k) * r..(a * m + k + 1) * r];
                    for (o, &c) in dst.iter_mut().zip(row) {
                        *o += w * c;
                    }
                }
            }
        });
        self.left[d + 1] = out;
    }

    /// `right[d] = Q_d(x) · right[d+1]`.
    fn update_right(&mut self, core: &Core, d: usize) {
        let (l, m, r) = (core.left(), core.mode(), core.right());
        let feats = &self.feats[d];
        let src = &self.right[d + 1];
        let mut out = vec![0.0; self.len * l];
        out.par_chunks_mut(l).enumerate().for_each(|(i, dst)| {
            let f = &feats[i * m..(i + 1) * m];
            let rv = &src[i * r..(i + 1) * r];
            for (a, o) in dst.iter_mut().enumerate() {
                let mut s = 0.0;
                for (k, &fk) in f.iter().enumerate() {
                    let row = &core.data()[(a * m + k) * r..(a * m + k + 1) * r];
                    s += fk * row.iter().zip(rv).map(|(c, v)| c * v).sum::<f64>();
                }
                *o = s;
            }
        });
        self.right[d] = out;
    }

    /// Local design, transposed: column `i` is `left_i ⊗ φ(x_i) ⊗ right_i`.
    fn design_t(&self, core: &Core, d: usize) -> DMatrix<f64> {
        let (l, m, r) = (core.left(), core.mode(), core.right());
        let k = l * m * r;
        let mut buf = vec![0.0; self.len * k];
        let left = &self.left[d];
        let right = &self.right[d + 1];
        let feats = &self.feats[d];
        buf.par_chunks_mut(k).enumerate().for_each(|(i, col)| {
            let lv = &left[i * l..(i + 1) * l];
            let f = &feats[i * m..(i + 1) * m];
            let rv = &right[i * r..(i + 1) * r];
            for (a, &la) in lv.iter().enumerate() {
                for (j, &fj) in f.iter().enumerate() {
                    let w = la * fj;
                    let dst = &mut col[(a * m + j) * r..(a * m + j + 1) * r];
                    for (o, &rb) in dst.iter_mut().zip(rv) {
                        *o = w * rb;
                    }
                }
            }
        });
        DMatrix::from_vec(k, self.len, buf)
    }
}

struct Problem<'a> {
    data: &'a RegressionData,
    weights: Vec<f64>,
    samples: Stacks,
    successors: Option<Stacks>,
}

impl Problem<'_> {
    /// Design (transposed) of the fitted operator at core `d`: plain
    /// features, or features minus the weighted successor features.
    fn local(&self, tt: &TensorTrain, d: usize) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
        let core = tt.core(d);
        let phi_t = self.samples.design_t(core, d);
        let succ = self.successors.as_ref().map(|st| {
            let s = self.data.successors.as_ref().unwrap();
            let sp = st.design_t(core, d);
            let mut agg = DMatrix::<f64>::zeros(phi_t.nrows(), self.data.len());
            for i in 0..self.data.len() {
                for j in s.offsets[i]..s.offsets[i + 1] {
                    agg.column_mut(i).axpy(s.coefs[j], &sp.column(j), 1.0);
                }
            }
            agg
        });
        (phi_t, succ)
    }

    fn risk_of(&self, phi_t: &DMatrix<f64>, succ: Option<&DMatrix<f64>>, u: &DVector<f64>) -> f64 {
        let mut pred = phi_t.tr_mul(u);
        if let Some(s) = succ {
            pred -= s.tr_mul(u);
        }
        pred.iter().zip(&self.data.targets).zip(&self.weights).map(|((p, y), w)| w * (p - y) * (p - y)).sum()
    }

    fn update_core(&self, tt: &mut TensorTrain, d: usize, delta: f64) -> Result<(f64, f64), AlsError> {
        let (phi_t, succ) = self.local(tt, d);
        let k = phi_t.nrows();
        let mut weighted = phi_t.clone();
        for (mut col, &w) in weighted.column_iter_mut().zip(&self.weights) {
            col *= w;
        }
        let y = DVector::from_column_slice(&self.data.targets);
        let rhs = &weighted * &y;
        let u = match &succ {
            None => {
                let mut g = &weighted * phi_t.transpose();
                for i in 0..k {
                    g[(i, i)] += delta;
                }
                solve_spd(g, &rhs)
            }
            Some(s) => {
                let diff = &phi_t - s;
                let mut g = &weighted * diff.transpose();
                for i in 0..k {
                    g[(i, i)] += delta;
                }
                solve_general(g, &rhs)
            }
        }
        .ok_or(AlsError::SingularSystem { core: d })?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(AlsError::SingularSystem { core: d });
        }
        let risk = self.risk_of(&phi_t, succ.as_ref(), &u);
        let norm2 = u.norm_squared();
        let core = tt.core_mut(d);
        // Flat core layout (a, i, b) matches the design column ordering.
        core.data_mut().copy_from_slice(u.as_slice());
        tt.set_canonical(Canonical::Center(d));
        Ok((risk, risk + delta * norm2))
    }

    fn current_risk(&self, tt: &TensorTrain, d: usize) -> f64 {
        let (phi_t, succ) = self.local(tt, d);
        let u = DVector::from_column_slice(tt.core(d).data());
        self.risk_of(&phi_t, succ.as_ref(), &u)
    }

    fn refresh_left(&mut self, tt: &TensorTrain, d: usize) {
        self.samples.update_left(tt.core(d), d);
        if let Some(s) = self.successors.as_mut() {
            s.update_left(tt.core(d), d);
        }
    }

    fn refresh_right(&mut self, tt: &TensorTrain, d: usize) {
        self.samples.update_right(tt.core(d), d);
        if let Some(s) = self.successors.as_mut() {
            s.update_right(tt.core(d), d);
        }
    }
}

/// Pivots below this fraction of the largest one mark a singular system.
const PIVOT_TOLERANCE: f64 = 1e-13;

fn solve_spd(g: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    match g.clone().cholesky() {
        Some(ch) => {
            let diag = ch.l_dirty().diagonal();
            let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            if lo * lo <= PIVOT_TOLERANCE * hi * hi {
                return None;
            }
            Some(ch.solve(rhs))
        }
        None => solve_general(g, rhs),
    }
}

fn solve_general(g: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = g.lu();
    let diag = lu.u().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v.abs()), b.max(v.abs())));
    if !(hi > 0.0) || lo <= PIVOT_TOLERANCE * hi {
        return None;
    }
    lu.solve(rhs)
}

/// Fits the tensor train of `init` to `data`, keeping bases and domain map.
pub fn als_fit(data: &RegressionData, init: &ValueModel, cfg: &AlsConfig) -> Result<AlsFit, AlsError> {
    if data.dim() != init.dim() {
        return Err(AlsError::Data(format!("data dimension {} vs model dimension {}", data.dim(), init.dim())));
    }
    if cfg.sweeps == 0 {
        return Err(AlsError::Data("at least one sweep is required".into()));
    }
    let n = init.dim();
    let mut tt = init.tt().clone();
    tt.canonicalize(0);
    let samples = Stacks::new(init, data.points(), data.len())?;
    let successors = match data.successors() {
        Some(s) => Some(Stacks::new(init, &s.points, s.coefs.len())?),
        None => None,
    };
    let mut prob = Problem { data, weights: data.normalized_weights(), samples, successors };
    prob.samples.init(&tt);
    if let Some(s) = prob.successors.as_mut() {
        s.init(&tt);
    }

    let mut report = AlsReport { initial_risk: prob.current_risk(&tt, 0), ..Default::default() };
    let mut risk = report.initial_risk;
    for sweep in 0..cfg.sweeps {
        let delta = cfg.ridge.delta(risk);
        report.deltas.push(delta);
        for d in 0..n {
            let (r, obj) = prob.update_core(&mut tt, d, delta)?;
            report.risks.push(r);
            report.objectives.push(obj);
            risk = r;
            if d + 1 < n {
                tt.left_orthogonalize(d);
                tt.set_canonical(Canonical::Center(d + 1));
                prob.refresh_left(&tt, d);
            }
        }
        for d in (0..n.saturating_sub(1)).rev() {
            tt.right_orthogonalize(d + 1);
            tt.set_canonical(Canonical::Center(d));
            prob.refresh_right(&tt, d + 1);
            let (r, obj) = prob.update_core(&mut tt, d, delta)?;
            report.risks.push(r);
            report.objectives.push(obj);
            risk = r;
        }
        debug!("als sweep {sweep}: delta {delta:.3e}, risk {risk:.6e}");
    }
    report.final_risk = risk;
    Ok(AlsFit { model: init.with_tt(tt)?, report })
}
