//! Fast built-in consistency checks, run by `ttpi selftest`.
//!
//! Every check compares a library routine against an independent
//! computation: quadrature, brute-force contraction, finite differences or a
//! closed-form solution.

use std::time::Instant;

use serde::Serialize;

use crate::basis::{BasisKind, BasisSet};
use crate::iteration::{policy_iteration, EvaluationMode, SolverConfig};
use crate::policy::ZeroPolicy;
use crate::problem::{make_double_well_1d, make_eikonal, make_three_hole_2d, NoiseOptions, Potential};
use crate::quadrature::gauss_legendre;
use crate::reference::{exact_eikonal, fd_hjb_1d, FdOptions};
use crate::rng::{Purpose, StreamFactory};
use crate::rollout::{simulate_paths, RolloutConfig};
use crate::tensor_train::{ModelFile, TensorTrain, ValueModel};

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = fn() -> Result<String, String>;

fn within(name: &str, value: f64, bound: f64) -> Result<String, String> {
    let msg = format!("{name} = {value:.3e} (bound {bound:.1e})");
    if value <= bound {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn quadrature_exactness() -> Result<String, String> {
    let (x, w) = gauss_legendre(8);
    // ∫₋₁¹ t¹⁴ dt = 2/15 needs degree 15 exactness.
    let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
    within("|Q(t^14) - 2/15|", (q - 2.0 / 15.0).abs(), 1e-14)
}

fn basis_orthonormality() -> Result<String, String> {
    let b = BasisSet::new(12, (-1.0, 1.0), BasisKind::OrthonormalH1).map_err(|e| e.to_string())?;
    let (x, w) = gauss_legendre(40);
    let n = b.dim();
    let (mut v, mut d) = (vec![0.0; n], vec![0.0; n]);
    let mut gram = vec![0.0; n * n];
    for (xi, wi) in x.iter().zip(&w) {
        b.eval_with_deriv_into(*xi, &mut v, &mut d).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] += wi * (v[i] * v[j] + d[i] * d[j]);
            }
        }
    }
    let err = (0..n * n).map(|k| (gram[k] - if k / n == k % n { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
    within("max |G_H1 - I|", err, 1e-10)
}

fn tt_contraction() -> Result<String, String> {
    let mut rng = StreamFactory::new(1).stream(Purpose::Check, 0, 0);
    let tt = TensorTrain::random(&[3, 4, 2], &[2, 3], &mut rng);
    let dense = tt.to_dense().map_err(|e| e.to_string())?;
    let c = tt.cores();
    let mut err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..4 {
            for k in 0..2 {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..3 {
                        s += c[0].get(0, i, a) * c[1].get(a, j, b) * c[2].get(b, k, 0);
                    }
                }
                err = err.max((dense.data[(i * 4 + j) * 2 + k] - s).abs());
            }
        }
    }
    within("max |dense - triple loop|", err, 1e-13)
}

fn gradient_vs_differences() -> Result<String, String> {
    let mut rng = StreamFactory::new(2).stream(Purpose::Check, 0, 0);
    let tt = TensorTrain::random(&[5, 5, 5], &[3, 3], &mut rng);
    let b = BasisSet::new(4, (-1.0, 1.0), BasisKind::OrthonormalH1).map_err(|e| e.to_string())?;
    let model = ValueModel::new(tt, vec![b; 3], vec![(-2.0, 2.0); 3]).map_err(|e| e.to_string())?;
    let x = [0.3, -1.1, 0.7];
    let g = model.grad(&x).map_err(|e| e.to_string())?;
    let h = 1e-6;
    let mut err: f64 = 0.0;
    for d in 0..3 {
        let (mut p, mut m) = (x, x);
        p[d] += h;
        m[d] -= h;
        let fd = (model.eval(&p).map_err(|e| e.to_string())? - model.eval(&m).map_err(|e| e.to_string())?) / (2.0 * h);
        err = err.max((fd - g[d]).abs() / g[d].abs().max(1.0));
    }
    within("relative gradient error", err, 1e-6)
}

fn model_round_trip() -> Result<String, String> {
    let mut rng = StreamFactory::new(3).stream(Purpose::Check, 0, 0);
    let tt = TensorTrain::random(&[4, 4], &[3], &mut rng);
    let b = BasisSet::new(3, (-1.0, 1.0), BasisKind::OrthonormalH1).map_err(|e| e.to_string())?;
    let model = ValueModel::new(tt, vec![b; 2], vec![(-3.0, 3.0); 2]).map_err(|e| e.to_string())?;
    let text = ModelFile::from_model(&model).to_json().map_err(|e| e.to_string())?;
    let back = ModelFile::from_json(&text).and_then(|f| f.to_model()).map_err(|e| e.to_string())?;
    let same = model
        .tt()
        .cores()
        .iter()
        .zip(back.tt().cores())
        .all(|(a, b)| a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    if same {
        Ok("cores identical bit for bit".into())
    } else {
        Err("cores differ after round trip".into())
    }
}

fn potential_gradients() -> Result<String, String> {
    let h = 1e-6;
    let mut err: f64 = 0.0;
    for (pot, x) in [
        (Potential::ThreeHole, vec![0.4, -0.8]),
        (Potential::DoubleWell { kappa: vec![5.0, 2.0, 1.0] }, vec![-0.3, 1.2, 0.1]),
    ] {
        let mut g = vec![0.0; x.len()];
        pot.gradient(&x, &mut g);
        for d in 0..x.len() {
            let (mut p, mut m) = (x.clone(), x.clone());
            p[d] += h;
            m[d] -= h;
            let fd = (pot.value(&p) - pot.value(&m)) / (2.0 * h);
            err = err.max((fd - g[d]).abs() / g[d].abs().max(1.0));
        }
    }
    within("relative gradient error", err, 1e-5)
}

fn eikonal_reference() -> Result<String, String> {
    let opts = FdOptions { nodes: 401, initial_control: 1.0, ..Default::default() };
    let grid = fd_hjb_1d(&make_eikonal(), &opts).map_err(|e| e.to_string())?;
    let err = grid
        .x
        .iter()
        .zip(&grid.v)
        .filter(|(x, _)| **x > -2.0 && **x < 1.0)
        .map(|(x, v)| (v - exact_eikonal(*x)).abs())
        .fold(0.0, f64::max);
    within("sup |v_FD - √2(1-x)|", err, 1e-9)
}

fn fd_residual() -> Result<String, String> {
    let p = make_double_well_1d(NoiseOptions::default()).map_err(|e| e.to_string())?;
    let grid = fd_hjb_1d(&p, &FdOptions::default()).map_err(|e| e.to_string())?;
    within("FD residual (3000 nodes)", grid.residual, 1e-8)
}

fn eikonal_policy_iteration() -> Result<String, String> {
    let cfg = SolverConfig {
        degree: 1,
        samples: Some(2),
        boundary_samples: 1,
        rollout: RolloutConfig { tau: 1e-3, repetitions: 1, ..Default::default() },
        evaluation: EvaluationMode::Projected,
        ridge_scale: Some(0.0),
        max_iterations: 30,
        ..Default::default()
    };
    let out = policy_iteration(&make_eikonal(), &cfg).map_err(|e| e.to_string())?;
    let err = (0..300)
        .map(|i| -2.0 + 3.0 * i as f64 / 300.0)
        .map(|x| out.model.eval(&[x]).map(|v| (v - exact_eikonal(x)).abs()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .fold(0.0, f64::max);
    within("sup |v_TT - √2(1-x)|", err, 1e-3)
}

fn rollout_determinism() -> Result<String, String> {
    let p = make_three_hole_2d(NoiseOptions::default()).map_err(|e| e.to_string())?;
    let cfg = RolloutConfig { repetitions: 20, ..Default::default() };
    let streams = StreamFactory::new(5);
    let x0 = [1.8, 1.8, 0.0, 2.0];
    let a = simulate_paths(&p, &ZeroPolicy, &x0, &cfg, &streams, 0).map_err(|e| e.to_string())?;
    let b = simulate_paths(&p, &ZeroPolicy, &x0, &cfg, &streams, 0).map_err(|e| e.to_string())?;
    if a == b {
        Ok("identical batches from identical streams".into())
    } else {
        Err("batches differ".into())
    }
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("gauss-legendre exactness", quadrature_exactness),
    ("H1 basis orthonormality", basis_orthonormality),
    ("tensor train contraction", tt_contraction),
    ("model gradient", gradient_vs_differences),
    ("model file round trip", model_round_trip),
    ("potential gradients", potential_gradients),
    ("FD eikonal", eikonal_reference),
    ("FD residual", fd_residual),
    ("eikonal policy iteration", eikonal_policy_iteration),
    ("rollout determinism", rollout_determinism),
];

pub fn run_selftest() -> Vec<SelfCheck> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SelfCheck { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}
