//! Polynomial value model induced by a tensor train and univariate bases.

use thiserror::Error;

use super::{Core, TensorTrain, TensorTrainError};
use crate::basis::{BasisError, BasisSet};
use crate::quadrature::{legendre_values, legendre_values_and_derivs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite coordinate {index}: {value}")]
    NonFinite { index: usize, value: f64 },
    #[error("point has dimension {found}, model expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("basis {index} has dimension {basis}, core mode size is {mode}")]
    BasisMismatch { index: usize, basis: usize, mode: usize },
    #[error("degenerate domain interval [{0}, {1}]")]
    DegenerateDomain(f64, f64),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    TensorTrain(#[from] TensorTrainError),
}

/// `v(x) = Σ A(i_1..i_n) Π_d φ_{i_d}(ξ_d(x_d))`, where `ξ_d` maps the domain
/// interval of coordinate `d` affinely onto the interval of basis `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueModel {
    tt: TensorTrain,
    bases: Vec<BasisSet>,
    domain: Vec<(f64, f64)>,
}

impl ValueModel {
    pub fn new(tt: TensorTrain, bases: Vec<BasisSet>, domain: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        let n = tt.order();
        if bases.len() != n {
            return Err(ModelError::Dimension { expected: n, found: bases.len() });
        }
        if domain.len() != n {
            return Err(ModelError::Dimension { expected: n, found: domain.len() });
        }
        for (d, (b, c)) in bases.iter().zip(tt.cores()).enumerate() {
            if b.dim() != c.mode() {
                return Err(ModelError::BasisMismatch { index: d, basis: b.dim(), mode: c.mode() });
            }
        }
        for &(lo, hi) in &domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ModelError::DegenerateDomain(lo, hi));
            }
        }
        Ok(Self { tt, bases, domain })
    }

    pub fn dim(&self) -> usize {
        self.tt.order()
    }

    pub fn tt(&self) -> &TensorTrain {
        &self.tt
    }

    pub fn bases(&self) -> &[BasisSet] {
        &self.bases
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn with_tt(&self, tt: TensorTrain) -> Result<Self, ModelError> {
        Self::new(tt, self.bases.clone(), self.domain.clone())
    }

    pub fn into_tt(self) -> TensorTrain {
        self.tt
    }

    /// Image of domain coordinate `x` in the interval of basis `d`.
    #[inline]
    pub fn map_coordinate(&self, d: usize, x: f64) -> f64 {
        let (lo, hi) = self.domain[d];
        let (a, b) = self.bases[d].interval();
        a + (x - lo) * (b - a) / (hi - lo)
    }

    /// Chain-rule factor of [`Self::map_coordinate`].
    #[inline]
    pub fn map_scale(&self, d: usize) -> f64 {
        let (lo, hi) = self.domain[d];
        let (a, b) = self.bases[d].interval();
        (b - a) / (hi - lo)
    }

    /// Whether the point lies in the domain box (otherwise evaluation is an
    /// extrapolation).
    pub fn inside(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.domain).all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::Dimension { expected: self.dim(), found: x.len() });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::NonFinite { index, value });
        }
        Ok(())
    }

    /// Basis values of coordinate `d` at domain point `x`.
    pub fn features(&self, d: usize, x: f64, out: &mut [f64]) -> Result<(), ModelError> {
        self.bases[d].eval_into(self.map_coordinate(d, x), out)?;
        Ok(())
    }

    /// Basis values and derivatives (with respect to the domain coordinate).
    pub fn features_with_deriv(&self, d: usize, x: f64, vals: &mut [f64], ders: &mut [f64]) -> Result<(), ModelError> {
        self.bases[d].eval_with_deriv_into(self.map_coordinate(d, x), vals, ders)?;
        let s = self.map_scale(d);
        ders.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    /// Straightforward evaluation through the basis feature vectors.
    pub fn eval(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.check_point(x)?;
        let feats = (0..self.dim())
            .map(|d| {
                let mut f = vec![0.0; self.bases[d].dim()];
                self.features(d, x[d], &mut f).map(|_| f)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&[f64]> = feats.iter().map(|f| f.as_slice()).collect();
        Ok(self.tt.contract(&refs)?)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        let eval = self.evaluator();
        let mut ws = eval.workspace();
        let mut g = vec![0.0; self.dim()];
        eval.value_and_grad(x, &mut ws, &mut g)?;
        Ok(g)
    }

    /// Precomputed evaluator for repeated queries.
    pub fn evaluator(&self) -> ModelEvaluator {
        ModelEvaluator::new(self)
    }
}

/// Evaluator with the cores transformed into the Legendre frame, so that a
/// query needs only the Legendre recurrence in each coordinate.
#[derive(Debug, Clone)]
pub struct ModelEvaluator {
    cores: Vec<Core>,
    /// Core data reordered mode-major, `slabs[d][(i * l + a) * r + b]`, so a
    /// mode contraction is a sum of contiguous `l × r` blocks.
    slabs: Vec<Vec<f64>>,
    /// `t = offset + scale * x` maps the domain onto [-1, 1].
    offset: Vec<f64>,
    scale: Vec<f64>,
    max_rank: usize,
    max_mode: usize,
}

/// Scratch buffers for one thread of [`ModelEvaluator`] calls.
#[derive(Debug, Clone)]
pub struct ModelWorkspace {
    leg: Vec<f64>,
    dleg: Vec<f64>,
    q: Vec<Vec<f64>>,
    dq: Vec<Vec<f64>>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl ModelEvaluator {
    pub fn new(model: &ValueModel) -> Self {
        let n = model.dim();
        let mut cores = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n);
        let mut scale = Vec::with_capacity(n);
        for d in 0..n {
            let core = model.tt.core(d);
            let c = model.bases[d].coeffs();
            let (l, m, r) = (core.left(), core.mode(), core.right());
            // U~(a, k, b) = Σ_i U(a, i, b) C[i, k]
            let mut data = vec![0.0; l * m * r];
            for a in 0..l {
                for i in 0..m {
                    for k in 0..=i {
                        let cik = c[(i, k)];
                        if cik == 0.0 {
                            continue;
                        }
                        for b in 0..r {
                            data[(a * m + k) * r + b] += cik * core.get(a, i, b);
                        }
                    }
                }
            }
            cores.push(Core::new(l, m, r, data));
            let (lo, hi) = model.domain[d];
            scale.push(2.0 / (hi - lo));
            offset.push(-(hi + lo) / (hi - lo));
        }
        let slabs = cores
            .iter()
            .map(|c| {
                let (l, m, r) = (c.left(), c.mode(), c.right());
                let mut out = Vec::with_capacity(l * m * r);
                for i in 0..m {
                    for a in 0..l {
                        out.extend((0..r).map(|b| c.get(a, i, b)));
                    }
                }
                out
            })
            .collect();
        let max_rank = cores.iter().map(|c| c.right().max(c.left())).max().unwrap_or(1);
        let max_mode = cores.iter().map(|c| c.mode()).max().unwrap_or(1);
        Self { cores, slabs, offset, scale, max_rank, max_mode }
    }

    pub fn dim(&self) -> usize {
        self.cores.len()
    }

    pub fn workspace(&self) -> ModelWorkspace {
        let n = self.cores.len();
        let rr = self.max_rank * self.max_rank;
        ModelWorkspace {
            leg: vec![0.0; self.max_mode],
            dleg: vec![0.0; self.max_mode],
            q: vec![vec![0.0; rr]; n],
            dq: vec![vec![0.0; rr]; n],
            left: vec![vec![0.0; self.max_rank]; n + 1],
            right: vec![vec![0.0; self.max_rank]; n + 1],
            tmp: vec![0.0; self.max_rank],
        }
    }

    fn check(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::Dimension { expected: self.dim(), found: x.len() });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::NonFinite { index, value });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64], ws: &mut ModelWorkspace) -> Result<f64, ModelError> {
        self.check(x)?;
        ws.left[0][0] = 1.0;
        for (d, core) in self.cores.iter().enumerate() {
            let (l, m, r) = (core.left(), core.mode(), core.right());
            let t = self.offset[d] + self.scale[d] * x[d];
            legendre_values(t, &mut ws.leg[..m]);
            contract_slab(&self.slabs[d], &ws.leg[..m], &mut ws.q[0][..l * r]);
            vec_mat(&ws.left[0][..l], &ws.q[0], r, &mut ws.tmp[..r]);
            ws.left[0][..r].copy_from_slice(&ws.tmp[..r]);
        }
        Ok(ws.left[0][0])
    }

    /// Value and gradient in one pass, using cached left and right
    /// contraction prefixes.
    pub fn value_and_grad(&self, x: &[f64], ws: &mut ModelWorkspace, grad: &mut [f64]) -> Result<f64, ModelError> {
        self.check(x)?;
        let n = self.cores.len();
        for (d, core) in self.cores.iter().enumerate() {
            let (m, size) = (core.mode(), core.left() * core.right());
            let t = self.offset[d] + self.scale[d] * x[d];
            legendre_values_and_derivs(t, &mut ws.leg[..m], &mut ws.dleg[..m]);
            contract_slab_pair(
                &self.slabs[d],
                &ws.leg[..m],
                &ws.dleg[..m],
                &mut ws.q[d][..size],
                &mut ws.dq[d][..size],
            );
        }
        ws.left[0][0] = 1.0;
        for d in 0..n {
            let core = &self.cores[d];
            let (l, r) = (core.left(), core.right());
            let (head, tail) = ws.left.split_at_mut(d + 1);
            vec_mat(&head[d][..l], &ws.q[d], r, &mut tail[0][..r]);
        }
        ws.right[n][0] = 1.0;
        for d in (0..n).rev() {
            let core = &self.cores[d];
            let (l, r) = (core.left(), core.right());
            let (head, tail) = ws.right.split_at_mut(d + 1);
            mat_vec(&ws.q[d], r, &tail[0][..r], &mut head[d][..l]);
        }
        for d in 0..n {
            let core = &self.cores[d];
            let (l, r) = (core.left(), core.right());
            mat_vec(&ws.dq[d], r, &ws.right[d + 1][..r], &mut ws.tmp[..l]);
            let g: f64 = ws.left[d][..l].iter().zip(&ws.tmp[..l]).map(|(a, b)| a * b).sum();
            grad[d] = g * self.scale[d];
        }
        Ok(ws.left[n][0])
    }
}

/// `out = Σ_i w_i slab_i` over consecutive blocks of `out.len()` entries.
#[inline]
fn contract_slab(slab: &[f64], w: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (&wi, block) in w.iter().zip(slab.chunks_exact(out.len())) {
        for (o, s) in out.iter_mut().zip(block) {
            *o += wi * s;
        }
    }
}

#[inline]
fn contract_slab_pair(slab: &[f64], w: &[f64], v: &[f64], out_w: &mut [f64], out_v: &mut [f64]) {
    out_w.fill(0.0);
    out_v.fill(0.0);
    for ((&wi, &vi), block) in w.iter().zip(v).zip(slab.chunks_exact(out_w.len())) {
        for ((x, y), s) in out_w.iter_mut().zip(out_v.iter_mut()).zip(block) {
            *x += wi * s;
            *y += vi * s;
        }
    }
}

#[inline]
fn vec_mat(v: &[f64], m: &[f64], cols: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (a, &va) in v.iter().enumerate() {
        let row = &m[a * cols..(a + 1) * cols];
        for (o, &x) in out.iter_mut().zip(row) {
            *o += va * x;
        }
    }
}

/// `out = M v` for a row-major `M` with `cols` columns.
#[inline]
fn mat_vec(m: &[f64], cols: usize, v: &[f64], out: &mut [f64]) {
    for (a, o) in out.iter_mut().enumerate() {
        *o = m[a * cols..(a + 1) * cols].iter().zip(v).map(|(x, y)| x * y).sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(n: usize, degree: usize, rank: usize, seed: u64) -> ValueModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = vec![degree + 1; n];
        let ranks = TensorTrain::feasible_ranks(&modes, &vec![rank; n - 1]);
        let tt = TensorTrain::random(&modes, &ranks, &mut rng);
        let basis = BasisSet::new(degree, (-1.0, 1.0), BasisKind::OrthonormalH1).unwrap();
        ValueModel::new(tt, vec![basis; n], vec![(-2.0, 3.0); n]).unwrap()
    }

    /// Oracle: dense coefficient tensor contracted with feature vectors.
    fn dense_eval(model: &ValueModel, x: &[f64]) -> f64 {
        let dense = model.tt().to_dense().unwrap();
        let feats: Vec<Vec<f64>> = (0..model.dim())
            .map(|d| {
                let mut f = vec![0.0; model.bases()[d].dim()];
                model.features(d, x[d], &mut f).unwrap();
                f
            })
            .collect();
        let mut total = 0.0;
        let mut idx = vec![0; model.dim()];
        for (flat, &a) in dense.data.iter().enumerate() {
            let mut rem = flat;
            for d in (0..model.dim()).rev() {
                idx[d] = rem % dense.shape[d];
                rem /= dense.shape[d];
            }
            total += a * idx.iter().enumerate().map(|(d, &i)| feats[d][i]).product::<f64>();
        }
        total
    }

    #[test]
    fn constant_selector_is_constant() {
        let basis = BasisSet::new(3, (-1.0, 1.0), BasisKind::LegendreL2).unwrap();
        let phi0 = basis.eval(0.3).unwrap()[0];
        let c = 2.5;
        let tt = TensorTrain::constant_selector(&[4, 4, 4], c / phi0.powi(3));
        let model = ValueModel::new(tt, vec![basis; 3], vec![(-1.0, 1.0); 3]).unwrap();
        let eval = model.evaluator();
        let mut ws = eval.workspace();
        let mut g = vec![0.0; 3];
        for x in [[0.1, 0.2, -0.9], [1.0, -1.0, 0.0]] {
            assert!((model.eval(&x).unwrap() - c).abs() < 1e-12);
            let v = eval.value_and_grad(&x, &mut ws, &mut g).unwrap();
            assert!((v - c).abs() < 1e-12);
            assert!(g.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn matches_dense_contraction() {
        for (n, p, r, seed) in [(2, 1, 2, 1), (3, 3, 3, 2), (4, 2, 3, 3)] {
            let model = random_model(n, p, r, seed);
            let eval = model.evaluator();
            let mut ws = eval.workspace();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            for _ in 0..50 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..3.0)).collect();
                let oracle = dense_eval(&model, &x);
                let tol = 1e-12 * (1.0 + oracle.abs());
                assert!((model.eval(&x).unwrap() - oracle).abs() <= tol);
                assert!((eval.value(&x, &mut ws).unwrap() - oracle).abs() <= tol);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let model = random_model(4, 5, 3, 7);
        let eval = model.evaluator();
        let mut ws = eval.workspace();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = 1e-6;
        let mut g = vec![0.0; 4];
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.9..2.9)).collect();
            eval.value_and_grad(&x, &mut ws, &mut g).unwrap();
            for d in 0..4 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[d] += h;
                xm[d] -= h;
                let fd = (model.eval(&xp).unwrap() - model.eval(&xm).unwrap()) / (2.0 * h);
                assert!((fd - g[d]).abs() <= 1e-5 * (1.0 + g[d].abs()), "{fd} vs {}", g[d]);
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        let model = random_model(2, 2, 2, 1);
        assert!(matches!(model.eval(&[0.0, f64::NAN]), Err(ModelError::NonFinite { index: 1, .. })));
        let eval = model.evaluator();
        let mut ws = eval.workspace();
        assert!(eval.value(&[f64::INFINITY, 0.0], &mut ws).is_err());
        assert!(matches!(model.eval(&[0.0]), Err(ModelError::Dimension { .. })));
    }

    #[test]
    fn mismatched_basis_rejected() {
        let tt = TensorTrain::constant_selector(&[3, 3], 1.0);
        let b = BasisSet::new(3, (-1.0, 1.0), BasisKind::LegendreL2).unwrap();
        assert!(matches!(
            ValueModel::new(tt, vec![b.clone(), b], vec![(0.0, 1.0); 2]),
            Err(ModelError::BasisMismatch { .. })
        ));
    }
}
