//! Tensor-train representation of the coefficient tensor.
//!
//! A tensor `A(i_1, …, i_n)` is stored as a chain of cores `U_d` of shape
//! `r_{d-1} × m_d × r_d` with `r_0 = r_n = 1`:
//!
//! ```text
//! A(i_1, …, i_n) = Σ_k U_1(1, i_1, k_1) U_2(k_1, i_2, k_2) ⋯ U_n(k_{n-1}, i_n, 1)
//! ```
//!
//! Cores are stored row-major, entry `(a, i, b)` at `(a * m + i) * right + b`.

mod als;
mod io;
mod model;

pub use als::{als_fit, AlsConfig, AlsError, AlsFit, AlsReport, RegressionData, RidgePolicy, Successors};
pub use io::{read_model, write_model, ModelFile, ModelIoError};
pub use model::{ModelError, ModelEvaluator, ModelWorkspace, ValueModel};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Largest dense tensor [`TensorTrain::to_dense`] will materialize.
pub const DENSE_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorTrainError {
    #[error("tensor train needs at least one core")]
    Empty,
    #[error("core {core} has left rank {found}, expected {expected}")]
    RankMismatch { core: usize, expected: usize, found: usize },
    #[error("core {core} has {found} entries, expected {expected}")]
    BadCoreSize { core: usize, expected: usize, found: usize },
    #[error("dense size {size} exceeds limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("expected {expected} feature vectors, got {found}")]
    FeatureCount { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// One 3-way core of shape `left × mode × right`.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    left: usize,
    mode: usize,
    right: usize,
    data: Vec<f64>,
}

impl Core {
    pub fn new(left: usize, mode: usize, right: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), left * mode * right, "core data length");
        Self { left, mode, right, data }
    }

    pub fn zeros(left: usize, mode: usize, right: usize) -> Self {
        Self::new(left, mode, right, vec![0.0; left * mode * right])
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> f64 {
        self.data[(a * self.mode + i) * self.right + b]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Left unfolding `(left·mode) × right`.
    pub fn left_unfolding(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.left * self.mode, self.right, &self.data)
    }

    /// Right unfolding `left × (mode·right)`.
    pub fn right_unfolding(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.left, self.mode * self.right, &self.data)
    }

    fn from_left_unfolding(left: usize, mode: usize, m: &DMatrix<f64>) -> Self {
        let right = m.ncols();
        let mut data = Vec::with_capacity(left * mode * right);
        for r in 0..m.nrows() {
            data.extend(m.row(r).iter());
        }
        Self::new(left, mode, right, data)
    }

    fn from_right_unfolding(mode: usize, right: usize, m: &DMatrix<f64>) -> Self {
        let left = m.nrows();
        let mut data = Vec::with_capacity(left * mode * right);
        for r in 0..left {
            data.extend(m.row(r).iter());
        }
        Self::new(left, mode, right, data)
    }

    /// `Σ_i w_i U(:, i, :)` as a `left × right` row-major matrix.
    pub fn contract_mode(&self, weights: &[f64], out: &mut [f64]) {
        let lr = self.right;
        if lr == 1 {
            for (o, row) in out[..self.left].iter_mut().zip(self.data.chunks_exact(self.mode)) {
                *o = row.iter().zip(weights).map(|(s, w)| w * s).sum();
            }
            return;
        }
        let block = self.mode * lr;
        for (dst, slab) in out[..self.left * lr].chunks_exact_mut(lr).zip(self.data.chunks_exact(block)) {
            dst.fill(0.0);
            for (&w, src) in weights.iter().zip(slab.chunks_exact(lr)) {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
}

/// Dense row-major tensor, used as a test oracle and for small instances.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self { shape, data: vec![0.0; len] }
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &m)| acc * m + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.index(idx)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Orthogonality state of a tensor train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    /// No orthogonality is known.
    None,
    /// Cores left of `center` are left-orthogonal, cores right of it
    /// right-orthogonal.
    Center(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorTrain {
    cores: Vec<Core>,
    canonical: Canonical,
}

impl TensorTrain {
    pub fn new(cores: Vec<Core>) -> Result<Self, TensorTrainError> {
        if cores.is_empty() {
            return Err(TensorTrainError::Empty);
        }
        let mut expected = 1;
        for (d, c) in cores.iter().enumerate() {
            if c.left != expected {
                return Err(TensorTrainError::RankMismatch { core: d, expected, found: c.left });
            }
            if c.data.len() != c.left * c.mode * c.right {
                return Err(TensorTrainError::BadCoreSize {
                    core: d,
                    expected: c.left * c.mode * c.right,
                    found: c.data.len(),
                });
            }
            expected = c.right;
        }
        if expected != 1 {
            let last = cores.len() - 1;
            return Err(TensorTrainError::RankMismatch { core: last, expected: 1, found: expected });
        }
        Ok(Self { cores, canonical: Canonical::None })
    }

    /// Clamps requested bond ranks to what the mode sizes can support.
    pub fn feasible_ranks(modes: &[usize], requested: &[usize]) -> Vec<usize> {
        let n = modes.len();
        (0..n.saturating_sub(1))
            .map(|d| {
                let left: usize = modes[..=d].iter().fold(1usize, |a, &m| a.saturating_mul(m));
                let right: usize = modes[d + 1..].iter().fold(1usize, |a, &m| a.saturating_mul(m));
                requested[d].max(1).min(left).min(right)
            })
            .collect()
    }

    /// Random cores with i.i.d. normal entries, each scaled to unit
    /// Frobenius norm.
    pub fn random<R: Rng + ?Sized>(modes: &[usize], ranks: &[usize], rng: &mut R) -> Self {
        assert_eq!(ranks.len() + 1, modes.len(), "need n-1 bond ranks");
        let full: Vec<usize> = std::iter::once(1).chain(ranks.iter().copied()).chain(std::iter::once(1)).collect();
        let cores = modes
            .iter()
            .enumerate()
            .map(|(d, &m)| {
                let len = full[d] * m * full[d + 1];
                let mut data: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
                let norm = data.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    data.iter_mut().for_each(|v| *v /= norm);
                }
                Core::new(full[d], m, full[d + 1], data)
            })
            .collect();
        Self::new(cores).expect("random cores chain by construction")
    }

    /// The tensor train with rank-1 cores, every core selecting mode 0 and
    /// the first core scaled by `value`.
    pub fn constant_selector(modes: &[usize], value: f64) -> Self {
        let cores = modes
            .iter()
            .enumerate()
            .map(|(d, &m)| {
                let mut c = Core::zeros(1, m, 1);
                c.data[0] = if d == 0 { value } else { 1.0 };
                c
            })
            .collect();
        Self::new(cores).expect("rank-1 cores chain")
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn modes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.mode).collect()
    }

    /// Bond ranks `r_1..r_{n-1}`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1].iter().map(|c| c.right).collect()
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn core(&self, d: usize) -> &Core {
        &self.cores[d]
    }

    pub fn canonical(&self) -> Canonical {
        self.canonical
    }

    /// Mutable core access; forgets any orthogonality.
    pub fn core_mut(&mut self, d: usize) -> &mut Core {
        self.canonical = Canonical::None;
        &mut self.cores[d]
    }

    pub(crate) fn set_canonical(&mut self, c: Canonical) {
        self.canonical = c;
    }

    /// Number of stored parameters `Σ r_{d-1} m_d r_d`.
    pub fn num_params(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    /// Parameter count for uniform mode size and bond rank.
    pub fn param_count(order: usize, mode: usize, rank: usize) -> usize {
        let ranks = vec![rank; order.saturating_sub(1)];
        let full: Vec<usize> = std::iter::once(1).chain(ranks).chain(std::iter::once(1)).collect();
        (0..order).map(|d| full[d] * mode * full[d + 1]).sum()
    }

    pub fn scale(&mut self, s: f64) {
        let d = match self.canonical {
            Canonical::Center(c) => c,
            Canonical::None => 0,
        };
        self.cores[d].data.iter_mut().for_each(|v| *v *= s);
    }

    /// Contraction with one feature vector per mode.
    pub fn contract(&self, features: &[&[f64]]) -> Result<f64, TensorTrainError> {
        if features.len() != self.order() {
            return Err(TensorTrainError::FeatureCount { expected: self.order(), found: features.len() });
        }
        let mut left = vec![1.0];
        let mut mat = Vec::new();
        for (core, f) in self.cores.iter().zip(features) {
            if f.len() != core.mode {
                return Err(TensorTrainError::Shape(format!("feature length {} for mode size {}", f.len(), core.mode)));
            }
            mat.resize(core.left * core.right, 0.0);
            core.contract_mode(f, &mut mat);
            let mut next = vec![0.0; core.right];
            for (a, &l) in left.iter().enumerate() {
                for (b, n) in next.iter_mut().enumerate() {
                    *n += l * mat[a * core.right + b];
                }
            }
            left = next;
        }
        Ok(left[0])
    }

    pub fn to_dense(&self) -> Result<DenseTensor, TensorTrainError> {
        self.to_dense_limited(DENSE_LIMIT)
    }

    pub fn to_dense_limited(&self, limit: usize) -> Result<DenseTensor, TensorTrainError> {
        let modes = self.modes();
        let size = modes.iter().fold(1usize, |a, &m| a.saturating_mul(m));
        if size > limit {
            return Err(TensorTrainError::TooLarge { size, limit });
        }
        // Running matrix (prefix size × current rank), extended one core at a time.
        let mut acc = DMatrix::<f64>::from_element(1, 1, 1.0);
        for core in &self.cores {
            let unfold = core.right_unfolding();
            let prod = &acc * &unfold; // prefix × (mode·right)
            let rows = prod.nrows() * core.mode;
            let mut next = DMatrix::<f64>::zeros(rows, core.right);
            for p in 0..prod.nrows() {
                for i in 0..core.mode {
                    for b in 0..core.right {
                        next[(p * core.mode + i, b)] = prod[(p, i * core.right + b)];
                    }
                }
            }
            acc = next;
        }
        Ok(DenseTensor::new(modes, acc.column(0).iter().copied().collect()))
    }

    /// TT-SVD: exact (or truncated) decomposition of a dense tensor.
    ///
    /// Singular values below `rel_tol · σ_max` of each unfolding are dropped
    /// and ranks are capped by `max_ranks` when given.
    pub fn from_dense(t: &DenseTensor, max_ranks: Option<&[usize]>, rel_tol: f64) -> Self {
        let n = t.shape.len();
        let mut cores = Vec::with_capacity(n);
        let mut rem = t.data.clone();
        let mut left = 1;
        for d in 0..n {
            let m = t.shape[d];
            if d == n - 1 {
                let mat = DMatrix::from_row_slice(left * m, 1, &rem);
                cores.push(Core::from_left_unfolding(left, m, &mat));
                break;
            }
            let cols = rem.len() / (left * m);
            let mat = DMatrix::from_row_slice(left * m, cols, &rem);
            let svd = mat.svd(true, true);
            let u = svd.u.unwrap();
            let vt = svd.v_t.unwrap();
            let s = &svd.singular_values;
            let order = sorted_desc(s.as_slice());
            let smax = order.first().map(|&k| s[k]).unwrap_or(0.0);
            let mut keep: Vec<usize> = order.into_iter().filter(|&k| s[k] > rel_tol * smax && s[k] > 0.0).collect();
            if let Some(caps) = max_ranks {
                keep.truncate(caps[d].max(1));
            }
            if keep.is_empty() {
                keep.push(0);
            }
            let r = keep.len();
            let mut uk = DMatrix::<f64>::zeros(left * m, r);
            let mut next = DMatrix::<f64>::zeros(r, cols);
            for (c, &k) in keep.iter().enumerate() {
                uk.set_column(c, &u.column(k));
                next.set_row(c, &(vt.row(k) * s[k]));
            }
            cores.push(Core::from_left_unfolding(left, m, &uk));
            rem = next.transpose().as_slice().to_vec();
            left = r;
        }
        let mut tt = Self::new(cores).expect("TT-SVD cores chain");
        tt.canonical = Canonical::Center(n - 1);
        tt
    }

    /// Makes core `d` left-orthogonal by QR and pushes the triangular factor
    /// into core `d+1`.
    pub fn left_orthogonalize(&mut self, d: usize) {
        assert!(d + 1 < self.order());
        let core = &self.cores[d];
        let (left, mode) = (core.left, core.mode);
        let qr = core.left_unfolding().qr();
        let q = qr.q();
        let r = qr.r();
        self.cores[d] = Core::from_left_unfolding(left, mode, &q);
        let next = &self.cores[d + 1];
        let merged = &r * next.right_unfolding();
        self.cores[d + 1] = Core::from_right_unfolding(next.mode, next.right, &merged);
    }

    /// Makes core `d` right-orthogonal and pushes the factor into core `d-1`.
    pub fn right_orthogonalize(&mut self, d: usize) {
        assert!(d > 0);
        let core = &self.cores[d];
        let (mode, right) = (core.mode, core.right);
        let qr = core.right_unfolding().transpose().qr();
        let q = qr.q().transpose();
        let l = qr.r().transpose();
        self.cores[d] = Core::from_right_unfolding(mode, right, &q);
        let prev = &self.cores[d - 1];
        let merged = prev.left_unfolding() * &l;
        self.cores[d - 1] = Core::from_left_unfolding(prev.left, prev.mode, &merged);
    }

    /// Brings the train into canonical form with the given center core.
    pub fn canonicalize(&mut self, center: usize) {
        let n = self.order();
        assert!(center < n);
        for d in 0..center {
            self.left_orthogonalize(d);
        }
        for d in (center + 1..n).rev() {
            self.right_orthogonalize(d);
        }
        self.canonical = Canonical::Center(center);
    }

    /// Frobenius norm of the full coefficient tensor.
    pub fn frobenius_norm(&self) -> f64 {
        if let Canonical::Center(c) = self.canonical {
            return self.cores[c].frobenius_norm();
        }
        let mut tmp = self.clone();
        tmp.canonicalize(0);
        tmp.cores[0].frobenius_norm()
    }

    /// Rank truncation by sequential SVD.
    ///
    /// The train is right-orthogonalized, then each bond is cut to at most
    /// `max_ranks[d]` singular values; trailing singular values whose
    /// combined norm stays below `tol / √(n-1)` are dropped as well.
    pub fn truncate(&self, max_ranks: &[usize], tol: f64) -> Self {
        let n = self.order();
        let mut tt = self.clone();
        tt.canonicalize(0);
        if n == 1 {
            return tt;
        }
        let per_bond = tol / ((n - 1) as f64).sqrt();
        for d in 0..n - 1 {
            let core = &tt.cores[d];
            let (left, mode) = (core.left, core.mode);
            let svd = core.left_unfolding().svd(true, true);
            let u = svd.u.unwrap();
            let vt = svd.v_t.unwrap();
            let s = svd.singular_values.as_slice().to_vec();
            let order = sorted_desc(&s);
            let mut keep = order.len();
            // Drop from the tail while the discarded mass stays below the budget.
            let mut tail = 0.0;
            while keep > 1 {
                let cand = s[order[keep - 1]];
                if (tail + cand * cand).sqrt() <= per_bond {
                    tail += cand * cand;
                    keep -= 1;
                } else {
                    break;
                }
            }
            keep = keep.min(max_ranks[d].max(1));
            let mut uk = DMatrix::<f64>::zeros(left * mode, keep);
            let mut svt = DMatrix::<f64>::zeros(keep, vt.ncols());
            for (c, &k) in order.iter().take(keep).enumerate() {
                uk.set_column(c, &u.column(k));
                svt.set_row(c, &(vt.row(k) * s[k]));
            }
            tt.cores[d] = Core::from_left_unfolding(left, mode, &uk);
            let next = &tt.cores[d + 1];
            let merged = &svt * next.right_unfolding();
            tt.cores[d + 1] = Core::from_right_unfolding(next.mode, next.right, &merged);
        }
        tt.canonical = Canonical::Center(n - 1);
        tt
    }
}

fn sorted_desc(s: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: explicit nested sums over all multi-indices.
    fn brute_force_dense(tt: &TensorTrain) -> DenseTensor {
        let modes = tt.modes();
        let mut out = DenseTensor::zeros(modes.clone());
        let total: usize = modes.iter().product();
        let mut idx = vec![0; modes.len()];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..modes.len()).rev() {
                idx[d] = rem % modes[d];
                rem /= modes[d];
            }
            let mut vec = vec![1.0];
            for (d, core) in tt.cores().iter().enumerate() {
                let mut next = vec![0.0; core.right()];
                for a in 0..core.left() {
                    for b in 0..core.right() {
                        next[b] += vec[a] * core.get(a, idx[d], b);
                    }
                }
                vec = next;
            }
            out.data[flat] = vec[0];
        }
        out
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [1.0, 2.0];
        let v = [3.0, -1.0, 0.5];
        let w = [2.0, 4.0];
        let tt = TensorTrain::new(vec![
            Core::new(1, 2, 1, u.to_vec()),
            Core::new(1, 3, 1, v.to_vec()),
            Core::new(1, 2, 1, w.to_vec()),
        ])
        .unwrap();
        let dense = tt.to_dense().unwrap();
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..2 {
                    assert_eq!(dense.get(&[i, j, k]), u[i] * v[j] * w[k]);
                }
            }
        }
    }

    #[test]
    fn dense_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tt = TensorTrain::random(&[3, 3, 3], &[2, 2], &mut rng);
        let dense = tt.to_dense().unwrap();
        let oracle = brute_force_dense(&tt);
        assert!(max_abs_diff(&dense.data, &oracle.data) < 1e-13);
    }

    #[test]
    fn dense_size_guard() {
        let tt = TensorTrain::constant_selector(&[11; 6], 1.0);
        assert!(matches!(tt.to_dense(), Err(TensorTrainError::TooLarge { .. })));
    }

    #[test]
    fn svd_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tt = TensorTrain::random(&[4, 3, 5, 2], &[3, 4, 2], &mut rng);
        let dense = tt.to_dense().unwrap();
        let back = TensorTrain::from_dense(&dense, None, 1e-14);
        let again = back.to_dense().unwrap();
        assert!(max_abs_diff(&dense.data, &again.data) < 1e-12);
        assert!(back.ranks().iter().zip(tt.ranks()).all(|(a, b)| *a <= b));
    }

    #[test]
    fn chain_validation() {
        let bad = TensorTrain::new(vec![Core::zeros(1, 2, 2), Core::zeros(3, 2, 1)]);
        assert!(matches!(bad, Err(TensorTrainError::RankMismatch { core: 1, .. })));
        let open = TensorTrain::new(vec![Core::zeros(1, 2, 2)]);
        assert!(open.is_err());
        assert!(matches!(TensorTrain::new(vec![]), Err(TensorTrainError::Empty)));
    }

    #[test]
    fn canonical_form_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tt = TensorTrain::random(&[4, 4, 4, 4], &[3, 4, 3], &mut rng);
        let before = tt.to_dense().unwrap();
        for center in 0..4 {
            let mut c = tt.clone();
            c.canonicalize(center);
            assert!(max_abs_diff(&before.data, &c.to_dense().unwrap().data) < 1e-13);
            for d in 0..center {
                let m = c.core(d).left_unfolding();
                let g = m.transpose() * &m;
                let err = (g.clone() - DMatrix::identity(g.nrows(), g.ncols())).abs().max();
                assert!(err < 1e-10, "left core {d}: {err}");
            }
            for d in center + 1..4 {
                let m = c.core(d).right_unfolding();
                let g = &m * m.transpose();
                let err = (g.clone() - DMatrix::identity(g.nrows(), g.ncols())).abs().max();
                assert!(err < 1e-10, "right core {d}: {err}");
            }
            let norm = before.frobenius_norm();
            assert!((c.frobenius_norm() - norm).abs() < 1e-12 * norm.max(1.0));
        }
    }

    #[test]
    fn truncate_to_own_ranks_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tt = TensorTrain::random(&[3, 4, 3], &[3, 3], &mut rng);
        let t = tt.truncate(&tt.ranks(), 0.0);
        assert!(max_abs_diff(&tt.to_dense().unwrap().data, &t.to_dense().unwrap().data) < 1e-12);
    }

    #[test]
    fn truncate_rank_two_matrix_to_best_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tt = TensorTrain::random(&[5, 6], &[2], &mut rng);
        let dense = tt.to_dense().unwrap();
        // Oracle: Eckart-Young via a dense SVD.
        let mat = DMatrix::from_row_slice(5, 6, &dense.data);
        let svd = mat.clone().svd(true, true);
        let k = sorted_desc(svd.singular_values.as_slice())[0];
        let best = svd.u.as_ref().unwrap().column(k) * svd.singular_values[k] * svd.v_t.as_ref().unwrap().row(k);
        let t = tt.truncate(&[1], 0.0);
        assert_eq!(t.ranks(), vec![1]);
        let got = t.to_dense().unwrap();
        let best_rows: Vec<f64> = (0..5).flat_map(|i| (0..6).map(move |j| (i, j))).map(|(i, j)| best[(i, j)]).collect();
        assert!(max_abs_diff(&got.data, &best_rows) < 1e-12);
    }

    #[test]
    fn truncate_error_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tt = TensorTrain::random(&[4, 4, 4, 4], &[4, 4, 4], &mut rng);
        let t = tt.truncate(&[2, 2, 2], 0.0);
        assert!(t.ranks().iter().all(|&r| r <= 2));
        let full = tt.to_dense().unwrap();
        let err: f64 =
            full.data.iter().zip(&t.to_dense().unwrap().data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        // Discarded singular values of every unfolding of the original.
        let mut discarded = 0.0;
        for d in 0..3 {
            let rows: usize = full.shape[..=d].iter().product();
            let mat = DMatrix::from_row_slice(rows, full.data.len() / rows, &full.data);
            let s = mat.singular_values();
            let order = sorted_desc(s.as_slice());
            discarded += order[2..].iter().map(|&k| s[k]).sum::<f64>();
        }
        assert!(err <= discarded + 1e-12, "{err} > {discarded}");
    }

    #[test]
    fn zero_tensor_truncates_to_zero() {
        let tt = TensorTrain::new(vec![Core::zeros(1, 3, 2), Core::zeros(2, 3, 2), Core::zeros(2, 3, 1)]).unwrap();
        let t = tt.truncate(&[1, 1], 1e-12);
        assert!(t.to_dense().unwrap().data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_parameter_count() {
        // n = 6, mode size 7, rank 5: 35 + 4·175 + 35.
        assert_eq!(TensorTrain::param_count(6, 7, 5), 770);
        let tt = TensorTrain::constant_selector(&[7; 6], 1.0);
        assert_eq!(tt.num_params(), 42);
    }

    #[test]
    fn feasible_ranks_clamp() {
        assert_eq!(TensorTrain::feasible_ranks(&[3, 3, 3], &[10, 10]), vec![3, 3]);
        assert_eq!(TensorTrain::feasible_ranks(&[17, 17], &[100]), vec![17]);
        assert_eq!(TensorTrain::feasible_ranks(&[2, 2, 2, 2], &[5, 5, 5]), vec![2, 4, 2]);
    }
}
