//! Feedback laws `x ↦ u(x)`.

use thiserror::Error;

use crate::problem::ControlProblem;
use crate::tensor_train::{ModelError, ModelEvaluator, ModelWorkspace, ValueModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("value model evaluation failed: {0}")]
    Model(#[from] ModelError),
    #[error("non-finite control at {0:?}")]
    NonFinite(Vec<f64>),
    #[error("query {x} outside the grid [{lo}, {hi}]")]
    OutsideGrid { x: f64, lo: f64, hi: f64 },
}

pub trait Policy: Sync {
    type Workspace: Send;

    fn workspace(&self) -> Self::Workspace;

    fn control(&self, x: &[f64], ws: &mut Self::Workspace, u: &mut [f64]) -> Result<(), PolicyError>;
}

/// `u ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    type Workspace = ();

    fn workspace(&self) {}

    fn control(&self, _x: &[f64], _ws: &mut (), u: &mut [f64]) -> Result<(), PolicyError> {
        u.iter_mut().for_each(|v| *v = 0.0);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ConstantPolicy(pub Vec<f64>);

impl Policy for ConstantPolicy {
    type Workspace = ();

    fn workspace(&self) {}

    fn control(&self, _x: &[f64], _ws: &mut (), u: &mut [f64]) -> Result<(), PolicyError> {
        u.copy_from_slice(&self.0);
        Ok(())
    }
}

/// `u = -½ B⁻¹ gᵀ ∇v`, scaled down to norm `u_max` when larger.
#[derive(Debug, Clone)]
pub struct FeedbackPolicy<'a> {
    problem: &'a ControlProblem,
    eval: ModelEvaluator,
    u_max: f64,
}

pub struct FeedbackWorkspace {
    model: ModelWorkspace,
    grad: Vec<f64>,
}

impl<'a> FeedbackPolicy<'a> {
    pub fn new(problem: &'a ControlProblem, model: &ValueModel, u_max: f64) -> Self {
        Self { problem, eval: model.evaluator(), u_max }
    }

    /// Value and control at `x` in one pass.
    pub fn value_and_control(&self, x: &[f64], ws: &mut FeedbackWorkspace, u: &mut [f64]) -> Result<f64, PolicyError> {
        let v = self.eval.value_and_grad(x, &mut ws.model, &mut ws.grad)?;
        self.problem.feedback_from_gradient(&ws.grad, u);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(PolicyError::NonFinite(x.to_vec()));
        }
        if norm > self.u_max {
            let s = self.u_max / norm;
            u.iter_mut().for_each(|v| *v *= s);
        }
        Ok(v)
    }
}

impl Policy for FeedbackPolicy<'_> {
    type Workspace = FeedbackWorkspace;

    fn workspace(&self) -> FeedbackWorkspace {
        FeedbackWorkspace { model: self.eval.workspace(), grad: vec![0.0; self.eval.dim()] }
    }

    fn control(&self, x: &[f64], ws: &mut FeedbackWorkspace, u: &mut [f64]) -> Result<(), PolicyError> {
        self.value_and_control(x, ws, u).map(|_| ())
    }
}

/// Either the zero policy or a model feedback, chosen at run time.
pub enum EitherPolicy<'a> {
    Zero,
    Feedback(FeedbackPolicy<'a>),
}

pub enum EitherWorkspace {
    Zero,
    Feedback(FeedbackWorkspace),
}

impl Policy for EitherPolicy<'_> {
    type Workspace = EitherWorkspace;

    fn workspace(&self) -> EitherWorkspace {
        match self {
            EitherPolicy::Zero => EitherWorkspace::Zero,
            EitherPolicy::Feedback(p) => EitherWorkspace::Feedback(p.workspace()),
        }
    }

    fn control(&self, x: &[f64], ws: &mut EitherWorkspace, u: &mut [f64]) -> Result<(), PolicyError> {
        match (self, ws) {
            (EitherPolicy::Feedback(p), EitherWorkspace::Feedback(w)) => p.control(x, w, u),
            _ => ZeroPolicy.control(x, &mut (), u),
        }
    }
}
