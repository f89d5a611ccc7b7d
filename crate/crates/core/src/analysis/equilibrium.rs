//! Phase-locked equilibria of the edge dynamics.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{edge_velocity, wrap_phase};
use crate::error::{Error, Result};
use crate::network::{is_connected, OscillatorNetwork};

/// Newton stops once `‖Bᵀω − BᵀBK sin X‖∞` drops below this.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
pub const MAX_NEWTON_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// Node phases with the last oscillator pinned to zero.
    pub theta: Vec<f64>,
    /// `X* = Bᵀθ*`, wrapped to `(−π, π]`.
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Common frequency of a synchronized network: the mean natural frequency.
pub fn sync_frequency(net: &OscillatorNetwork) -> f64 {
    let w = net.natural_frequencies();
    w.iter().sum::<f64>() / w.len() as f64
}

fn edge_residual(net: &OscillatorNetwork, theta: &[f64]) -> f64 {
    let x = net.incidence().edge_differences(theta);
    edge_velocity(net, &x)
        .expect("edge count matches")
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// Node residual `ω − BK sin(Bᵀθ) − Ω*·1`, first `N − 1` rows.
fn reduced_residual(net: &OscillatorNetwork, theta: &[f64], mean: f64) -> DVector<f64> {
    let n = net.n();
    let mut f = vec![0.0; n];
    crate::dynamics::theta_dot_into(net, theta, &mut f);
    DVector::from_iterator(n - 1, f.iter().take(n - 1).map(|v| v - mean))
}

/// Reduced Jacobian `−(B K diag(cos Bᵀθ) Bᵀ)` with the last row and column dropped.
fn reduced_jacobian(net: &OscillatorNetwork, theta: &[f64]) -> DMatrix<f64> {
    let n = net.n();
    let mut j = DMatrix::zeros(n - 1, n - 1);
    let scale = 1.0 / n as f64;
    for (&(a, b), &g) in net.incidence().pairs().iter().zip(net.coupling_gains()) {
        if g == 0.0 {
            continue;
        }
        let w = g * scale * (theta[a] - theta[b]).cos();
        for (r, c, s) in [(a, a, -w), (b, b, -w), (a, b, w), (b, a, w)] {
            if r < n - 1 && c < n - 1 {
                j[(r, c)] += s;
            }
        }
    }
    j
}

/// Finds a phase-locked state by Newton iteration on the node frequencies
/// relative to their mean, with `θ_N` pinned to 0.
///
/// A backtracking line search keeps the iteration from overshooting; failure to
/// reach the residual tolerance usually means the gains are below critical.
pub fn solve_equilibrium(net: &OscillatorNetwork, theta_guess: &[f64]) -> Result<Equilibrium> {
    let n = net.n();
    if theta_guess.len() != n {
        return Err(Error::invalid(format!(
            "theta_guess has length {}, expected {n}",
            theta_guess.len()
        )));
    }
    if theta_guess.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("theta_guess must be finite"));
    }
    if !is_connected(net) {
        return Err(Error::invalid("equilibrium search needs a connected network"));
    }
    let mean = super::sync_frequency(net);
    let pin = theta_guess[n - 1];
    let mut theta: Vec<f64> = theta_guess.iter().map(|t| t - pin).collect();
    let mut residual = edge_residual(net, &theta);
    let gain_scale = net.coupling_gains().iter().fold(0.0f64, |m, g| m.max(*g)) / n as f64;

    for iteration in 0..=MAX_NEWTON_ITERATIONS {
        if residual < RESIDUAL_TOLERANCE {
            let x = net
                .incidence()
                .edge_differences(&theta)
                .into_iter()
                .map(wrap_phase)
                .collect();
            return Ok(Equilibrium {
                theta,
                x,
                iterations: iteration,
                residual,
            });
        }
        if iteration == MAX_NEWTON_ITERATIONS {
            break;
        }
        let h = reduced_residual(net, &theta, mean);
        let jac = reduced_jacobian(net, &theta);
        // weights K̃ cos(x)/N are bounded by the largest scaled gain
        if jac.singular_values().min() <= 1e-13 * gain_scale {
            return Err(Error::SingularAtIterate { iteration });
        }
        let step = jac
            .lu()
            .solve(&(-&h))
            .ok_or(Error::SingularAtIterate { iteration })?;

        let norm0 = h.amax();
        let mut lambda = 1.0;
        let mut trial = theta.clone();
        for _ in 0..40 {
            for (t, (th, d)) in trial.iter_mut().zip(theta.iter().zip(step.iter())) {
                *t = th + lambda * d;
            }
            if reduced_residual(net, &trial, mean).amax() < norm0 || lambda < 1e-6 {
                break;
            }
            lambda *= 0.5;
        }
        theta = trial;
        residual = edge_residual(net, &theta);
    }
    Err(Error::NoEquilibriumFound {
        iterations: MAX_NEWTON_ITERATIONS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn identical_frequencies_lock_in_phase() {
        let net = OscillatorNetwork::new(vec![2.0; 4], vec![1.0, 0.0, 3.0, 1.0, 0.0, 2.0]).unwrap();
        let eq = solve_equilibrium(&net, &[0.3, -0.2, 0.1, 0.0]).unwrap();
        for x in eq.x {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn three_chain_fixed_point() {
        let net = OscillatorNetwork::new(vec![1.0, 2.0, 3.0], vec![9.0, 6.0, 0.0]).unwrap();
        let eq = solve_equilibrium(&net, &[0.0; 3]).unwrap();
        assert_abs_diff_eq!(eq.x[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(eq.x[1], -PI / 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(eq.x[2], -PI / 6.0, epsilon = 1e-9);
        assert!(eq.residual < RESIDUAL_TOLERANCE);
    }

    #[test]
    fn two_oscillators_scalar_solve() {
        let net = OscillatorNetwork::new(vec![0.5, 0.0], vec![1.0]).unwrap();
        let eq = solve_equilibrium(&net, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(eq.x[0], PI / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn subcritical_gain_reports_no_equilibrium() {
        let net = OscillatorNetwork::new(vec![2.0, 0.0], vec![1.0]).unwrap();
        assert!(matches!(
            solve_equilibrium(&net, &[0.1, 0.0]),
            Err(Error::NoEquilibriumFound { .. }) | Err(Error::SingularAtIterate { .. })
        ));
    }

    #[test]
    fn singular_jacobian_is_reported() {
        // cos(π/2) = 0 makes the only edge weight vanish
        let net = OscillatorNetwork::new(vec![2.0, 0.0], vec![1.0]).unwrap();
        assert!(matches!(
            solve_equilibrium(&net, &[PI / 2.0, 0.0]),
            Err(Error::SingularAtIterate { iteration: 0 })
        ));
    }

    #[test]
    fn disconnected_network_is_rejected() {
        let net = OscillatorNetwork::new(vec![1.0, 2.0, 3.0], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            solve_equilibrium(&net, &[0.0; 3]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn mean_frequency() {
        let five = OscillatorNetwork::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![1.0; 10]).unwrap();
        assert_eq!(sync_frequency(&five), 3.0);
        let same = OscillatorNetwork::new(vec![-0.7; 3], vec![1.0; 3]).unwrap();
        assert_abs_diff_eq!(sync_frequency(&same), -0.7, epsilon = 1e-15);
        let three = OscillatorNetwork::new(vec![1.0, 2.0, 3.0], vec![9.0, 6.0, 0.0]).unwrap();
        assert_eq!(sync_frequency(&three), 2.0);
    }
}
