//! Lyapunov functions for the edge dynamics.

use std::f64::consts::FRAC_PI_2;

use crate::dynamics::{EdgeState, Trajectory};
use crate::network::OscillatorNetwork;

/// `(V₂, V̇₂) = (‖V‖²/2, VᵀG(X)V)`.
pub fn lyapunov_v2(state: &EdgeState, net: &OscillatorNetwork) -> (f64, f64) {
    let v2 = 0.5 * state.v.iter().map(|v| v * v).sum::<f64>();
    // G(X)V = −BᵀB (K cos X ∘ V)
    let weighted: Vec<f64> = net
        .scaled_gains()
        .iter()
        .zip(&state.x)
        .zip(&state.v)
        .map(|((k, x), v)| k * x.cos() * v)
        .collect();
    let b = net.incidence();
    let gv = b.edge_differences(&b.scatter(&weighted));
    let v2_dot = -state.v.iter().zip(&gv).map(|(v, g)| v * g).sum::<f64>();
    (v2, v2_dot)
}

/// `(V₂, V̇₂)` at every stored step.
pub fn lyapunov_v2_along(traj: &Trajectory, net: &OscillatorNetwork) -> Vec<(f64, f64)> {
    traj.edge_states(net.incidence())
        .map(|s| lyapunov_v2(&s, net))
        .collect()
}

/// Largest step-to-step increase of `V₂` (negative when strictly decreasing).
pub fn max_v2_increase(values: &[(f64, f64)]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `V₃(X) = Σ|xᵢ| − (N−1)π/2`.
pub fn lyapunov_v3(x: &[f64], n: usize) -> f64 {
    x.iter().map(|v| v.abs()).sum::<f64>() - (n as f64 - 1.0) * FRAC_PI_2
}

/// Set-valued Lie derivative of `V₃`: `Σ sign(xᵢ) vᵢ`, or `None` (the empty
/// set) when some `xᵢ = 0` has `vᵢ ≠ 0`.
pub fn lyapunov_v3_rate(state: &EdgeState) -> Option<f64> {
    let mut rate = 0.0;
    for (x, v) in state.x.iter().zip(&state.v) {
        if *x == 0.0 {
            if *v != 0.0 {
                return None;
            }
        } else {
            rate += x.signum() * v;
        }
    }
    Some(rate)
}
