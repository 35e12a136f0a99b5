//! Gauss-Legendre quadrature and Legendre polynomial recurrences on [-1, 1].

use std::f64::consts::PI;

/// Values of P_0..P_p at `t`, written into `values` (length p+1).
pub fn legendre_values(t: f64, values: &mut [f64]) {
    let len = values.len();
    if len == 0 {
        return;
    }
    values[0] = 1.0;
    if len > 1 {
        values[1] = t;
    }
    for k in 1..len.saturating_sub(1) {
        // The divisions stay off the recurrence's dependency chain.
        let kf = k as f64;
        let (a, b) = ((2.0 * kf + 1.0) / (kf + 1.0), kf / (kf + 1.0));
        values[k + 1] = a * t * values[k] - b * values[k - 1];
    }
}

/// Values and first derivatives of P_0..P_p at `t`.
///
/// Uses P'_{k+1} = P'_{k-1} + (2k+1) P_k, which stays accurate at the
/// interval endpoints.
pub fn legendre_values_and_derivs(t: f64, values: &mut [f64], derivs: &mut [f64]) {
    debug_assert_eq!(values.len(), derivs.len());
    legendre_values(t, values);
    let len = values.len();
    if len == 0 {
        return;
    }
    derivs[0] = 0.0;
    if len > 1 {
        derivs[1] = 1.0;
    }
    for k in 1..len.saturating_sub(1) {
        derivs[k + 1] = derivs[k - 1] + (2.0 * k as f64 + 1.0) * values[k];
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Exact for polynomials of degree up to 2n-1. Nodes are returned in
/// increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut vals = vec![0.0; n + 1];
    let mut ders = vec![0.0; n + 1];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            legendre_values_and_derivs(x, &mut vals, &mut ders);
            let dx = vals[n] / ders[n];
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        legendre_values_and_derivs(x, &mut vals, &mut ders);
        let w = 2.0 / ((1.0 - x * x) * ders[n] * ders[n]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
