//! Coupling-gain thresholds.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{edge_laplacian, OscillatorNetwork};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingBounds {
    /// Per-edge gain `(N/2)|ω_i − ω_j|` that keeps the phase-cohesive set invariant.
    pub per_edge_sufficient: Vec<f64>,
    /// Uniform all-to-all critical gain `N‖Bᵀω‖∞ / (2(N−1))`.
    pub uniform_k0: f64,
    /// Per-edge gain below which the cohesive set cannot be invariant given the
    /// other gains.
    pub onset_lower: Vec<f64>,
    pub attracting: AttractingCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractingCheck {
    pub delta: f64,
    pub delta_m: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub margin: f64,
    /// Every nonzero gain is at least `(N−2)Δₘ/2`.
    pub side_condition: bool,
    pub holds: bool,
}

fn frequency_gaps(net: &OscillatorNetwork) -> Vec<f64> {
    net.incidence()
        .edge_differences(net.natural_frequencies())
        .into_iter()
        .map(f64::abs)
        .collect()
}

pub fn sufficient_gain_bounds(net: &OscillatorNetwork) -> Vec<f64> {
    let half_n = net.n() as f64 / 2.0;
    frequency_gaps(net).into_iter().map(|d| half_n * d).collect()
}

pub fn uniform_critical_gain(net: &OscillatorNetwork) -> f64 {
    let n = net.n() as f64;
    let max_gap = frequency_gaps(net).into_iter().fold(0.0, f64::max);
    n * max_gap / (2.0 * (n - 1.0))
}

/// Necessary per-edge gains: `K̃_i` must exceed
/// `(N/2)|eᵢᵀBᵀω| − ½ Σ_{j≠i} |(BᵀB)_ij| K̃_j` (floored at zero) for the
/// cohesive set to be invariant.
pub fn onset_lower_bounds(net: &OscillatorNetwork) -> Vec<f64> {
    let btb = edge_laplacian(net.incidence());
    let gains = net.coupling_gains();
    sufficient_gain_bounds(net)
        .into_iter()
        .enumerate()
        .map(|(i, need)| {
            let support: f64 = (0..gains.len())
                .filter(|&j| j != i)
                .map(|j| btb[(i, j)].abs() as f64 * gains[j])
                .sum();
            (need - 0.5 * support).max(0.0)
        })
        .collect()
}

/// Sufficient condition for the cohesive set to attract every state whose
/// phase differences stay within `(−π + δ, π − δ]`.
pub fn attracting_set_check(net: &OscillatorNetwork, delta: f64) -> Result<AttractingCheck> {
    if !(delta > 0.0 && delta < PI) {
        return Err(Error::invalid(format!("delta must lie in (0, π), got {delta}")));
    }
    let n = net.n() as f64;
    let gains = net.coupling_gains();
    let (kmin, kmax) = gains
        .iter()
        .filter(|&&g| g > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| {
            (lo.min(g), hi.max(g))
        });
    let delta_m = if kmax.is_finite() { kmax - kmin } else { 0.0 };
    let spread = (n - 2.0) * delta_m;

    let lhs = gains
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|g| 2.0 * g - spread)
        .sum::<f64>()
        * delta.abs().sin()
        / n;
    let absent = gains.iter().filter(|&&g| g == 0.0).count() as f64;
    let rhs = frequency_gaps(net).iter().sum::<f64>() + absent * spread / n;
    let side_condition = gains
        .iter()
        .filter(|&&g| g > 0.0)
        .all(|&g| g >= spread / 2.0);
    let margin = lhs - rhs;
    Ok(AttractingCheck {
        delta,
        delta_m,
        lhs,
        rhs,
        margin,
        side_condition,
        holds: side_condition && margin > 0.0,
    })
}

pub fn coupling_bounds(net: &OscillatorNetwork, delta: f64) -> Result<CouplingBounds> {
    Ok(CouplingBounds {
        per_edge_sufficient: sufficient_gain_bounds(net),
        uniform_k0: uniform_critical_gain(net),
        onset_lower: onset_lower_bounds(net),
        attracting: attracting_set_check(net, delta)?,
    })
}

/// Whether every gain meets its sufficient bound.
pub fn meets_sufficient_bounds(net: &OscillatorNetwork) -> bool {
    net.coupling_gains()
        .iter()
        .zip(sufficient_gain_bounds(net))
        .all(|(&g, need)| g >= need)
}
