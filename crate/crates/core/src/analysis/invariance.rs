//! Membership in the phase-cohesive set `ℋ` and Monte-Carlo invariance checks.
//!
//! `ℋ` collects edge states whose phase differences lie in the open box
//! `(−π/2, π/2)ᵉ ∩ Col(Bᵀ)` and whose frequency differences obey, per edge,
//! `|eᵢᵀBᵀω| ≤ (2/N)K̃ᵢ + (1/N) Σ_{j≠i} |(BᵀB)_ij| K̃_j sin|x_j|`.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bounds::meets_sufficient_bounds;
use super::lyapunov::{lyapunov_v2_along, max_v2_increase};
use crate::dynamics::{edge_velocity, simulate, EdgeState, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::network::{edge_laplacian, OscillatorNetwork};

/// Tolerance on the `Col(Bᵀ)` and velocity-consistency checks.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;
pub const MAX_SAMPLING_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HMembership {
    pub member: bool,
    pub in_box: bool,
    pub in_column_space: bool,
    pub velocity_consistent: bool,
    /// Right-hand minus left-hand side of the per-edge inequality.
    pub slack: Vec<f64>,
}

/// `‖X − P X‖∞` with `P = BᵀB/N` the orthogonal projector onto `Col(Bᵀ)`.
pub fn column_space_residual(net: &OscillatorNetwork, x: &[f64]) -> f64 {
    let b = net.incidence();
    let n = net.n() as f64;
    let proj = b.edge_differences(&b.scatter(x));
    x.iter()
        .zip(proj)
        .map(|(xi, p)| (xi - p / n).abs())
        .fold(0.0, f64::max)
}

pub fn in_set_h(state: &EdgeState, net: &OscillatorNetwork) -> Result<HMembership> {
    let e = net.n_edges();
    if state.x.len() != e || state.v.len() != e {
        return Err(Error::invalid(format!("edge state must have {e} components")));
    }
    let in_box = state.x.iter().all(|x| x.abs() < FRAC_PI_2);
    let in_column_space = column_space_residual(net, &state.x) <= MEMBERSHIP_TOLERANCE;
    let expected_v = edge_velocity(net, &state.x)?;
    let velocity_consistent = expected_v
        .iter()
        .zip(&state.v)
        .all(|(a, b)| (a - b).abs() <= MEMBERSHIP_TOLERANCE);

    let n = net.n() as f64;
    let gains = net.coupling_gains();
    let btb = edge_laplacian(net.incidence());
    let gaps = net.incidence().edge_differences(net.natural_frequencies());
    let slack: Vec<f64> = (0..e)
        .map(|i| {
            let cross: f64 = (0..e)
                .filter(|&j| j != i)
                .map(|j| btb[(i, j)].abs() as f64 * gains[j] * state.x[j].abs().sin())
                .sum();
            2.0 / n * gains[i] + cross / n - gaps[i].abs()
        })
        .collect();
    let member = in_box && in_column_space && velocity_consistent && slack.iter().all(|s| *s >= 0.0);
    Ok(HMembership {
        member,
        in_box,
        in_column_space,
        velocity_consistent,
        slack,
    })
}

/// Draws node phases whose pairwise differences all lie strictly inside
/// `(−π/2 + margin, π/2 − margin)`.
pub fn sample_cohesive_phases<R: Rng>(n: usize, margin: f64, rng: &mut R) -> Result<Vec<f64>> {
    let half = FRAC_PI_2 - margin;
    if half.is_nan() || half <= 0.0 {
        return Err(Error::invalid(format!("margin {margin} leaves an empty box")));
    }
    for _ in 0..MAX_SAMPLING_DRAWS {
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-half..half)).collect();
        let lo = theta.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < half {
            return Ok(theta);
        }
    }
    Err(Error::SamplingInfeasible {
        draws: MAX_SAMPLING_DRAWS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    pub n_samples: usize,
    pub horizon: f64,
    pub dt: f64,
    pub margin: f64,
    pub seed: u64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            n_samples: 100,
            horizon: 50.0,
            dt: DEFAULT_DT,
            margin: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub initial_theta: Vec<f64>,
    pub stayed_in_h: bool,
    pub first_exit_time: Option<f64>,
    pub max_v2_increase: f64,
    pub max_v2_dot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub bounds_met: bool,
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub margin: f64,
    pub n_samples: usize,
    pub n_passed: usize,
    pub fraction: f64,
    pub passed: bool,
    pub max_v2_increase: f64,
    pub max_v2_dot: f64,
    pub samples: Vec<SampleOutcome>,
}

fn run_sample(
    net: &OscillatorNetwork,
    index: usize,
    theta0: Vec<f64>,
    opts: &CertificateOptions,
) -> Result<SampleOutcome> {
    let traj = simulate(net, &theta0, opts.horizon, opts.dt)?;
    let mut first_exit_time = None;
    for (k, state) in traj.edge_states(net.incidence()).enumerate() {
        if !in_set_h(&state, net)?.member {
            first_exit_time = Some(traj.times[k]);
            break;
        }
    }
    let v2 = lyapunov_v2_along(&traj, net);
    Ok(SampleOutcome {
        index,
        initial_theta: theta0,
        stayed_in_h: first_exit_time.is_none(),
        first_exit_time,
        max_v2_increase: max_v2_increase(&v2),
        max_v2_dot: v2.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Integrates `n_samples` trajectories started in `ℋ` and reports how many stay
/// there over the horizon. Initial phases come from one seeded generator in
/// sample order; trajectories run in parallel and are merged by index.
pub fn invariance_certificate(
    net: &OscillatorNetwork,
    opts: &CertificateOptions,
) -> Result<InvarianceReport> {
    if opts.n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts = (0..opts.n_samples)
        .map(|_| sample_cohesive_phases(net.n(), opts.margin, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let samples = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, theta0)| run_sample(net, i, theta0, opts))
        .collect::<Result<Vec<_>>>()?;

    let n_passed = samples.iter().filter(|s| s.stayed_in_h).count();
    Ok(InvarianceReport {
        bounds_met: meets_sufficient_bounds(net),
        seed: opts.seed,
        horizon: opts.horizon,
        dt: opts.dt,
        margin: opts.margin,
        n_samples: opts.n_samples,
        n_passed,
        fraction: n_passed as f64 / opts.n_samples as f64,
        passed: n_passed == opts.n_samples,
        max_v2_increase: samples
            .iter()
            .map(|s| s.max_v2_increase)
            .fold(f64::NEG_INFINITY, f64::max),
        max_v2_dot: samples
            .iter()
            .map(|s| s.max_v2_dot)
            .fold(f64::NEG_INFINITY, f64::max),
        samples,
    })
}
