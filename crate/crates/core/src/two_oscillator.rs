//! Planar analysis of a pair of coupled oscillators.
//!
//! With `x₁ = Δθ = θ₁ − θ₂` and `x₂ = Δθ̇`, the pair obeys
//! `Δθ̇ = Δω − K sin Δθ`, or in derivative form `ẋ₁ = x₂`, `ẋ₂ = −K x₂ cos x₁`.
//! Here `K` is the pair's coupling gain `K₁₂`; a two-oscillator
//! [`OscillatorNetwork`](crate::network::OscillatorNetwork) with gain `K̃ = K`
//! has exactly these dynamics.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::dynamics::wrap_phase;
use crate::error::{Error, Result};
use crate::network::OscillatorNetwork;
use crate::ode::{step_count, Rk4};

/// Default half-width of the neighbourhood used for direction-cone checks.
pub const DEFAULT_CONE_EPS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarParams {
    k: f64,
    delta_omega: f64,
}

impl PlanarParams {
    pub fn new(k: f64, delta_omega: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid(format!("coupling gain must be positive, got {k}")));
        }
        if !delta_omega.is_finite() {
            return Err(Error::invalid("frequency mismatch must be finite"));
        }
        Ok(Self { k, delta_omega })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    /// The equivalent node-space network, `ω = (Δω, 0)`, `K̃ = (K)`.
    pub fn to_network(&self) -> OscillatorNetwork {
        OscillatorNetwork::new(vec![self.delta_omega, 0.0], vec![self.k])
            .expect("positive gain and finite frequency")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SlopeInterval {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// `(ẋ₁, ẋ₂) = (x₂, −K x₂ cos x₁)`.
pub fn planar_field(x: (f64, f64), p: &PlanarParams) -> (f64, f64) {
    (x.1, -p.k * x.1 * x.0.cos())
}

/// Phase-difference velocity `Δω − K sin Δθ`.
pub fn phase_difference_rate(delta_theta: f64, p: &PlanarParams) -> f64 {
    p.delta_omega - p.k * delta_theta.sin()
}

fn check_open_half_circle(x1: f64) -> Result<()> {
    if !(x1 > -FRAC_PI_2 && x1 < FRAC_PI_2) {
        return Err(Error::OutOfDomain(format!(
            "x1 = {x1} lies outside (-π/2, π/2)"
        )));
    }
    Ok(())
}

/// Boundary curves of the invariant region: `K(1 − sin x₁)` above and
/// `−K(1 + sin x₁)` below.
pub fn region_g_boundary(x1: f64, p: &PlanarParams, side: Side) -> Result<f64> {
    check_open_half_circle(x1)?;
    Ok(match side {
        Side::Upper => p.k * (1.0 - x1.sin()),
        Side::Lower => -p.k * (1.0 + x1.sin()),
    })
}

/// Membership in `{x₁ ∈ (−π/2, π/2), −K(1 + sin x₁) ≤ x₂ ≤ K(1 − sin x₁)}`.
pub fn in_region_g(x: (f64, f64), p: &PlanarParams) -> bool {
    in_region_g_with_tol(x, p, 0.0)
}

/// As [`in_region_g`] with the closed `x₂` bounds relaxed by `tol`.
pub fn in_region_g_with_tol(x: (f64, f64), p: &PlanarParams, tol: f64) -> bool {
    let (x1, x2) = x;
    if !(x1 > -FRAC_PI_2 && x1 < FRAC_PI_2) {
        return false;
    }
    let upper = p.k * (1.0 - x1.sin());
    let lower = -p.k * (1.0 + x1.sin());
    x2 >= lower - tol && x2 <= upper + tol
}

/// Outer estimate of the direction cone at the equilibrium `(a, 0)`, as the
/// range of slopes `ẋ₂/ẋ₁ = −K cos x₁` over `x₁ ∈ [a − ε, a + ε]`.
pub fn direction_cone_estimate(a: f64, eps: f64, p: &PlanarParams) -> Result<SlopeInterval> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfDomain(format!("eps must be positive, got {eps}")));
    }
    check_open_half_circle(a)?;
    if a.abs() + eps >= FRAC_PI_2 {
        return Err(Error::OutOfDomain(format!(
            "|a| + eps = {} reaches π/2",
            a.abs() + eps
        )));
    }
    Ok(SlopeInterval::new(
        -p.k * (a + eps).cos(),
        -p.k * (a - eps).cos(),
    ))
}

/// Whether the cone estimate at `(a, 0)` meets the tangent line `{(c, 0)}` of
/// the equilibrium set only at the origin, i.e. no admissible slope is zero.
pub fn nontangency_planar(a: f64, eps: f64, p: &PlanarParams) -> Result<bool> {
    let cone = direction_cone_estimate(a, eps, p)?;
    Ok(!cone.contains(0.0))
}

/// Stable and unstable phase-locked equilibria of `Δθ̇ = Δω − K sin Δθ`, when
/// `|Δω| ≤ K`. The unstable one lies outside `[−π/2, π/2]`.
pub fn locked_equilibria(p: &PlanarParams) -> Option<(f64, f64)> {
    let r = p.delta_omega / p.k;
    if r.abs() > 1.0 {
        return None;
    }
    let stable = r.asin();
    Some((stable, wrap_phase(PI - stable)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalSyncReport {
    pub synchronizes: bool,
    pub stable_equilibrium: Option<f64>,
    pub unstable_equilibrium: Option<f64>,
    /// Minimum of the divergence `−K cos x₁` over sampled points of the
    /// region `x₁ ∈ (−π, π] \ [−π/2, π/2]`.
    pub min_divergence_outside: f64,
    /// The divergence keeps a strict sign there, ruling out closed orbits.
    pub divergence_positive: bool,
}

/// Every initial condition synchronizes iff `|Δω| ≤ K`.
pub fn global_sync_verdict(p: &PlanarParams) -> GlobalSyncReport {
    global_sync_verdict_with(p, 400)
}

pub fn global_sync_verdict_with(p: &PlanarParams, samples_per_side: usize) -> GlobalSyncReport {
    let n = samples_per_side.max(1);
    // x₁ ∈ (π/2, π] and its mirror (−π, −π/2), endpoints at ±π/2 excluded
    let min_divergence_outside = (1..=n)
        .flat_map(|k| {
            let x = FRAC_PI_2 + FRAC_PI_2 * k as f64 / n as f64;
            [x, -x]
        })
        .filter(|x| *x > -PI)
        .map(|x| -p.k * x.cos())
        .fold(f64::INFINITY, f64::min);
    let eq = locked_equilibria(p);
    GlobalSyncReport {
        synchronizes: p.delta_omega.abs() <= p.k,
        stable_equilibrium: eq.map(|e| e.0),
        unstable_equilibrium: eq.map(|e| e.1),
        min_divergence_outside,
        divergence_positive: min_divergence_outside > 0.0,
    }
}

/// RK4 path of the planar system from `x0`, including the start.
pub fn integrate_planar(
    x0: (f64, f64),
    p: &PlanarParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(dt > 0.0 && t_end >= dt && x0.0.is_finite() && x0.1.is_finite()) {
        return Err(Error::invalid("need finite x0, dt > 0 and t_end >= dt"));
    }
    let k = p.k;
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -k * y[1] * y[0].cos();
    };
    let mut rk = Rk4::new(2);
    let mut y = [x0.0, x0.1];
    let steps = step_count(t_end, dt);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0);
    for s in 0..steps {
        rk.step(&rhs, s as f64 * dt, &mut y, dt);
        out.push((y[0], y[1]));
    }
    Ok(out)
}

/// Unwrapped `Δθ(t)` of `Δθ̇ = Δω − K sin Δθ` sampled at every step.
pub fn integrate_phase_difference(
    delta_theta0: f64,
    p: &PlanarParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_end >= dt && delta_theta0.is_finite()) {
        return Err(Error::invalid("need finite start, dt > 0 and t_end >= dt"));
    }
    let p = *p;
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = phase_difference_rate(y[0], &p);
    let mut rk = Rk4::new(1);
    let mut y = [delta_theta0];
    let steps = step_count(t_end, dt);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y[0]);
    for s in 0..steps {
        rk.step(&rhs, s as f64 * dt, &mut y, dt);
        out.push(y[0]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(k: f64, dw: f64) -> PlanarParams {
        PlanarParams::new(k, dw).unwrap()
    }

    #[test]
    fn field_examples() {
        let p = params(1.0, 0.0);
        assert_eq!(planar_field((0.9, 0.0), &p), (0.0, 0.0));
        assert_eq!(planar_field((0.0, 1.0), &p), (1.0, -1.0));
        let (a, b) = planar_field((FRAC_PI_2, 2.5), &p);
        assert_eq!(a, 2.5);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn params_require_positive_gain() {
        assert!(PlanarParams::new(0.0, 1.0).is_err());
        assert!(PlanarParams::new(-1.0, 1.0).is_err());
        assert!(PlanarParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn boundary_values() {
        let p = params(1.0, 0.0);
        assert_eq!(region_g_boundary(0.0, &p, Side::Upper).unwrap(), 1.0);
        assert_eq!(region_g_boundary(0.0, &p, Side::Lower).unwrap(), -1.0);
        let near = region_g_boundary(FRAC_PI_2 - 1e-9, &p, Side::Upper).unwrap();
        assert!(near.abs() < 1e-12);
        assert!(matches!(
            region_g_boundary(FRAC_PI_2, &p, Side::Upper),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn upper_boundary_is_a_trajectory() {
        let p = params(1.3, 0.0);
        let path = integrate_planar((0.0, p.k()), &p, 20.0, 0.01).unwrap();
        for (x1, x2) in path {
            assert!((x2 + p.k() * x1.sin() - p.k()).abs() < 1e-6);
        }
    }

    #[test]
    fn region_membership() {
        let p = params(2.0, 0.0);
        assert!(in_region_g((0.0, 0.0), &p));
        assert!(in_region_g((0.0, 2.0), &p));
        assert!(!in_region_g((0.0, 2.0 + 1e-9), &p));
        assert!(!in_region_g((FRAC_PI_2, 0.0), &p));
        assert!(!in_region_g((-FRAC_PI_2, 0.0), &p));
    }

    #[test]
    fn cone_examples() {
        let p = params(1.0, 0.0);
        let c = direction_cone_estimate(0.0, 0.1, &p).unwrap();
        assert_eq!(c.lo, c.hi);
        assert_eq!(c.lo, -(0.1f64).cos());
        let c = direction_cone_estimate(PI / 4.0, 0.1, &p).unwrap();
        assert_abs_diff_eq!(c.lo, -(PI / 4.0 - 0.1).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.hi, -(PI / 4.0 + 0.1).cos(), epsilon = 1e-15);
        let c = direction_cone_estimate(-0.6, 0.2, &p).unwrap();
        assert!(c.lo <= c.hi && c.hi < 0.0);
    }

    #[test]
    fn cone_domain_errors() {
        let p = params(1.0, 0.0);
        assert!(matches!(
            nontangency_planar(1.47, 0.2, &p),
            Err(Error::OutOfDomain(_))
        ));
        assert!(direction_cone_estimate(0.0, 0.0, &p).is_err());
        assert!(direction_cone_estimate(-1.6, 0.01, &p).is_err());
    }

    #[test]
    fn nontangency_holds_across_stable_equilibria() {
        let p = params(1.0, 0.0);
        assert!(nontangency_planar(0.0, 0.1, &p).unwrap());
        let eps = DEFAULT_CONE_EPS;
        let lo = -FRAC_PI_2 + eps;
        let hi = FRAC_PI_2 - eps;
        for k in 1..=100 {
            let a = lo + (hi - lo) * k as f64 / 101.0;
            assert!(nontangency_planar(a, eps, &p).unwrap(), "a = {a}");
        }
    }

    #[test]
    fn sync_verdicts() {
        let r = global_sync_verdict(&params(1.0, 0.5));
        assert!(r.synchronizes);
        assert!(r.divergence_positive);
        assert_abs_diff_eq!(r.stable_equilibrium.unwrap(), PI / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.unstable_equilibrium.unwrap(), 5.0 * PI / 6.0, epsilon = 1e-15);
        assert!(!global_sync_verdict(&params(1.0, 1.5)).synchronizes);
        let edge = global_sync_verdict(&params(1.0, 1.0));
        assert!(edge.synchronizes);
        assert_abs_diff_eq!(edge.stable_equilibrium.unwrap(), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn drift_beyond_critical_gain() {
        let p = params(1.0, 1.5);
        let path = integrate_phase_difference(0.0, &p, 100.0, 0.01).unwrap();
        // mean slip rate is sqrt(Δω² − K²) ≈ 1.118 rad/s
        assert!(path.last().unwrap() - path[0] > 100.0);
    }
}
