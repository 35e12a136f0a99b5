//! End-to-end checks of the solver against closed forms and the finite
//! difference reference.

use ttpi::iteration::{policy_iteration, sample_initial_states, EvaluationMode, SolverConfig};
use ttpi::policy::{FeedbackPolicy, Policy};
use ttpi::problem::{make_double_well_1d, make_eikonal, NoiseOptions};
use ttpi::reference::{exact_eikonal, fd_hjb_1d, FdOptions, GridPolicy};
use ttpi::rng::StreamFactory;
use ttpi::rollout::{evaluate_policy_cost, RolloutConfig};

fn eikonal_config(max_iterations: usize) -> SolverConfig {
    SolverConfig {
        degree: 1,
        samples: Some(2),
        boundary_samples: 1,
        rollout: RolloutConfig { tau: 1e-3, repetitions: 1, ..Default::default() },
        evaluation: EvaluationMode::Projected,
        ridge_scale: Some(0.0),
        max_iterations,
        seed: 1,
        ..Default::default()
    }
}

#[test]
fn eikonal_samples_lie_left_of_the_exit() {
    let x = sample_initial_states(&make_eikonal(), 2, &StreamFactory::new(1), 0).unwrap();
    assert_eq!(x.len(), 2);
    assert!(x.iter().all(|&v| (-2.0..1.0).contains(&v)), "{x:?}");
}

#[test]
fn eikonal_costs_improve_monotonically() {
    let p = make_eikonal();
    let full = policy_iteration(&p, &eikonal_config(30)).unwrap();
    assert!(full.converged);
    let rollout = RolloutConfig::default();
    let streams = StreamFactory::new(0);
    // Iteration k uses the policy of the fit after k - 1 iterations, so each
    // cap reproduces a prefix of the full run.
    let mut previous = f64::INFINITY;
    for k in 1..=full.diagnostics.len() {
        let run = policy_iteration(&p, &eikonal_config(k)).unwrap();
        let policy = FeedbackPolicy::new(&p, &run.model, 100.0);
        let report = evaluate_policy_cost(&p, &policy, &[-1.0], 1, &rollout, &streams).unwrap();
        let cost = report.mean_cost.unwrap_or(f64::INFINITY);
        assert!(cost <= previous + 1e-9, "iteration {k}: cost {cost} after {previous}");
        previous = cost;
    }
    assert!((previous - 2.0 * 2f64.sqrt()).abs() <= 1e-3, "final cost {previous}");
}

#[test]
fn grid_and_model_feedback_agree_on_the_eikonal() {
    let p = make_eikonal();
    let grid = fd_hjb_1d(&p, &FdOptions { nodes: 601, initial_control: 1.0, ..Default::default() }).unwrap();
    let model = policy_iteration(&p, &eikonal_config(30)).unwrap().model;
    let (grid_policy, feedback) = (GridPolicy::new(&grid), FeedbackPolicy::new(&p, &model, 100.0));
    let (mut a, mut b) = ([0.0], [0.0]);
    let mut ws = feedback.workspace();
    for i in 0..=100 {
        let x = [-1.9 + 2.8 * i as f64 / 100.0];
        grid_policy.control(&x, &mut (), &mut a).unwrap();
        feedback.control(&x, &mut ws, &mut b).unwrap();
        assert!((a[0] - b[0]).abs() <= 1e-3, "x = {}: {} vs {}", x[0], a[0], b[0]);
    }
    for (x, v) in grid.x.iter().zip(&grid.v) {
        assert!((v - exact_eikonal(*x)).abs() <= 1e-9);
    }
}

#[test]
fn reference_grid_refinement() {
    let p = make_double_well_1d(NoiseOptions::default()).unwrap();
    let coarse = fd_hjb_1d(&p, &FdOptions { nodes: 3000, ..Default::default() }).unwrap();
    let fine = fd_hjb_1d(&p, &FdOptions { nodes: 6000, ..Default::default() }).unwrap();
    let diff = coarse.x.iter().zip(&coarse.v).map(|(x, v)| (v - fine.value_at(*x).unwrap()).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-4, "sup difference {diff:.3e}");
    assert!(coarse.residual <= 1e-8 && fine.residual <= 1e-8);
}
