//! Univariate polynomial bases with values, derivatives and Gram matrices.
//!
//! Every basis is stored in the Legendre frame: row `k` of the coefficient
//! matrix expresses `phi_k` as a combination of Legendre polynomials
//! `P_j(t)`, where `t` is the affine image of the basis interval on
//! [-1, 1]. Orthonormalization is Gram-Schmidt against inner products that
//! are assembled with Gauss-Legendre quadrature, which is exact here.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{gauss_legendre, legendre_values, legendre_values_and_derivs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("degenerate basis interval [{0}, {1}]")]
    DegenerateInterval(f64, f64),
    #[error("orthogonalization lost rank at degree {degree} (relative norm {relative_norm:.3e})")]
    RankLoss { degree: usize, relative_norm: f64 },
    #[error("non-finite evaluation point {0}")]
    NonFinite(f64),
}

/// Which inner product the basis is orthonormal in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// Normalized Legendre polynomials: `∫ φ_i φ_j = δ_ij`.
    LegendreL2,
    /// Orthonormal for `∫ φ_i φ_j + φ_i' φ_j'` (unweighted H1).
    OrthonormalH1,
}

/// Smallest relative norm a Gram-Schmidt step may leave before the basis
/// is declared numerically rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BasisSet {
    degree: usize,
    interval: (f64, f64),
    kind: BasisKind,
    coeffs: DMatrix<f64>,
    l2_gram: DMatrix<f64>,
    h1_gram: DMatrix<f64>,
}

impl PartialEq for BasisSet {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.interval == other.interval && self.kind == other.kind
    }
}

impl BasisSet {
    pub fn new(degree: usize, interval: (f64, f64), kind: BasisKind) -> Result<Self, BasisError> {
        let (a, b) = interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(BasisError::DegenerateInterval(a, b));
        }
        let (l2_leg, h1_leg) = legendre_frame_grams(degree, interval);
        let inner = match kind {
            BasisKind::LegendreL2 => &l2_leg,
            BasisKind::OrthonormalH1 => &h1_leg,
        };

        let coeffs = gram_schmidt(inner)?;

        let l2_gram = &coeffs * &l2_leg * coeffs.transpose();
        let h1_gram = &coeffs * &h1_leg * coeffs.transpose();
        Ok(Self { degree, interval, kind, coeffs, l2_gram, h1_gram })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `degree + 1`.
    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Legendre-frame coefficients, one basis function per row.
    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn l2_gram(&self) -> &DMatrix<f64> {
        &self.l2_gram
    }

    pub fn h1_gram(&self) -> &DMatrix<f64> {
        &self.h1_gram
    }

    /// Whether `x` lies in the basis interval (outside is extrapolation).
    pub fn contains(&self, x: f64) -> bool {
        x >= self.interval.0 && x <= self.interval.1
    }

    /// Map from the basis interval to the Legendre reference variable.
    #[inline]
    pub fn to_reference(&self, x: f64) -> f64 {
        let (a, b) = self.interval;
        (2.0 * x - a - b) / (b - a)
    }

    /// `dt/dx` of [`Self::to_reference`].
    #[inline]
    pub fn reference_scale(&self) -> f64 {
        2.0 / (self.interval.1 - self.interval.0)
    }

    pub fn eval(&self, x: f64) -> Result<Vec<f64>, BasisError> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    pub fn eval_deriv(&self, x: f64) -> Result<Vec<f64>, BasisError> {
        let mut vals = vec![0.0; self.dim()];
        let mut ders = vec![0.0; self.dim()];
        self.eval_with_deriv_into(x, &mut vals, &mut ders)?;
        Ok(ders)
    }

    pub fn eval_into(&self, x: f64, out: &mut [f64]) -> Result<(), BasisError> {
        if !x.is_finite() {
            return Err(BasisError::NonFinite(x));
        }
        let dim = self.dim();
        let mut leg = vec![0.0; dim];
        legendre_values(self.to_reference(x), &mut leg);
        for (k, o) in out.iter_mut().enumerate().take(dim) {
            *o = (0..=k).map(|j| self.coeffs[(k, j)] * leg[j]).sum();
        }
        Ok(())
    }

    pub fn eval_with_deriv_into(&self, x: f64, vals: &mut [f64], ders: &mut [f64]) -> Result<(), BasisError> {
        if !x.is_finite() {
            return Err(BasisError::NonFinite(x));
        }
        let dim = self.dim();
        let mut leg = vec![0.0; dim];
        let mut dleg = vec![0.0; dim];
        legendre_values_and_derivs(self.to_reference(x), &mut leg, &mut dleg);
        let scale = self.reference_scale();
        for k in 0..dim {
            let row = self.coeffs.row(k);
            let mut v = 0.0;
            let mut d = 0.0;
            // Gram-Schmidt from the Legendre frame keeps the matrix lower triangular.
            for j in 0..=k {
                v += row[j] * leg[j];
                d += row[j] * dleg[j];
            }
            vals[k] = v;
            ders[k] = d * scale;
        }
        Ok(())
    }
}

/// Orthonormalizes the unit vectors e_0, e_1, ... under the inner product
/// with matrix `inner`; row k of the result is the k-th orthonormal vector.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass.
fn gram_schmidt(inner: &DMatrix<f64>) -> Result<DMatrix<f64>, BasisError> {
    let dim = inner.nrows();
    let mut coeffs = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..dim {
        let mut v = nalgebra::DVector::<f64>::zeros(dim);
        v[k] = 1.0;
        let start_norm = inner[(k, k)].max(0.0).sqrt();
        for _pass in 0..2 {
            for j in 0..k {
                let q = coeffs.row(j).transpose();
                let proj = q.dot(&(inner * &v));
                v -= proj * q;
            }
        }
        let norm = v.dot(&(inner * &v)).max(0.0).sqrt();
        let relative_norm = norm / start_norm;
        if !(relative_norm > RANK_TOLERANCE) {
            return Err(BasisError::RankLoss { degree: k, relative_norm });
        }
        coeffs.set_row(k, &(v / norm).transpose());
    }
    Ok(coeffs)
}

/// L2 and H1 Gram matrices of P_0..P_p mapped onto `interval`.
fn legendre_frame_grams(degree: usize, interval: (f64, f64)) -> (DMatrix<f64>, DMatrix<f64>) {
    let dim = degree + 1;
    let (a, b) = interval;
    let half = 0.5 * (b - a);
    let scale = 2.0 / (b - a);
    // Integrands have degree at most 2p.
    let (nodes, weights) = gauss_legendre(degree + 2);
    let mut l2 = DMatrix::<f64>::zeros(dim, dim);
    let mut semi = DMatrix::<f64>::zeros(dim, dim);
    let mut leg = vec![0.0; dim];
    let mut dleg = vec![0.0; dim];
    for (&t, &w) in nodes.iter().zip(&weights) {
        legendre_values_and_derivs(t, &mut leg, &mut dleg);
        for i in 0..dim {
            for j in 0..dim {
                l2[(i, j)] += w * half * leg[i] * leg[j];
                semi[(i, j)] += w * half * scale * scale * dleg[i] * dleg[j];
            }
        }
    }
    let h1 = &l2 + &semi;
    (l2, h1)
}
