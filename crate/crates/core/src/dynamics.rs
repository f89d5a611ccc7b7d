//! Node-space Kuramoto dynamics, the edge-space transform and trajectories.
//!
//! The node-space system is
//!
//! ```text
//! θ̇_i = ω_i + Σ_{j≠i} (K̃_ij / N) sin(θ_j − θ_i)  =  (ω − B K sin(Bᵀθ))_i
//! ```
//!
//! with `K = diag(K̃)/N`. In edge coordinates `X = Bᵀθ`, `V = Bᵀθ̇` it becomes
//! `Ẋ = V`, `V̇ = G(X) V` with `G(X) = −BᵀB K diag(cos X)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::network::{IncidenceMatrix, OscillatorNetwork};
use crate::ode::{step_count, Rk4};

/// Default integration step (s).
pub const DEFAULT_DT: f64 = 0.01;
/// `‖V‖∞` threshold below which the network counts as synchronized.
pub const SYNC_TOLERANCE: f64 = 1e-6;
/// Simulated time (s) the threshold must hold.
pub const SYNC_HOLD: f64 = 1.0;

/// Wraps an angle to `(−π, π]`.
#[inline]
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

pub(crate) fn theta_dot_into(net: &OscillatorNetwork, theta: &[f64], out: &mut [f64]) {
    out.copy_from_slice(net.natural_frequencies());
    let n = net.n() as f64;
    for (&(i, j), &g) in net.incidence().pairs().iter().zip(net.coupling_gains()) {
        if g == 0.0 {
            continue;
        }
        let s = g / n * (theta[i] - theta[j]).sin();
        out[i] -= s;
        out[j] += s;
    }
}

/// Node frequencies `θ̇ = ω − B K sin(Bᵀθ)`.
pub fn theta_dot(theta: &[f64], net: &OscillatorNetwork) -> Result<Vec<f64>> {
    check_len("theta", theta.len(), net.n())?;
    let mut out = vec![0.0; net.n()];
    theta_dot_into(net, theta, &mut out);
    Ok(out)
}

/// Node frequencies from the oscillator-by-oscillator sum
/// `ω_i + Σ_{j≠i} (K_ij/N) sin(θ_j − θ_i)`.
pub fn theta_dot_pairwise(theta: &[f64], net: &OscillatorNetwork) -> Result<Vec<f64>> {
    let n = net.n();
    check_len("theta", theta.len(), n)?;
    let gains = net.coupling_gains();
    let omega = net.natural_frequencies();
    let coupling = |i: usize, j: usize| {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        crate::network::edge_index(n, lo, hi).map_or(0.0, |k| gains[k])
    };
    Ok((0..n)
        .map(|i| {
            omega[i]
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| coupling(i, j) / n as f64 * (theta[j] - theta[i]).sin())
                    .sum::<f64>()
        })
        .collect())
}

/// Edge coordinates: phase differences `X` (rad) and frequency differences
/// `V` (rad/s), both in edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// `X = Bᵀθ` wrapped to `(−π, π]`, `V = Bᵀθ̇`.
pub fn edge_transform(theta: &[f64], theta_dot: &[f64], b: &IncidenceMatrix) -> EdgeState {
    EdgeState {
        x: b.edge_differences(theta)
            .into_iter()
            .map(wrap_phase)
            .collect(),
        v: b.edge_differences(theta_dot),
    }
}

/// `BᵀB K sin X`, the coupling part of the edge velocity.
pub(crate) fn edge_coupling(net: &OscillatorNetwork, x: &[f64]) -> Vec<f64> {
    let b = net.incidence();
    let weighted: Vec<f64> = net
        .scaled_gains()
        .iter()
        .zip(x)
        .map(|(k, xi)| k * xi.sin())
        .collect();
    b.edge_differences(&b.scatter(&weighted))
}

/// Edge velocity implied by the phase differences: `Bᵀω − BᵀB K sin X`.
pub fn edge_velocity(net: &OscillatorNetwork, x: &[f64]) -> Result<Vec<f64>> {
    check_len("X", x.len(), net.n_edges())?;
    let drift = net.incidence().edge_differences(net.natural_frequencies());
    Ok(drift
        .iter()
        .zip(edge_coupling(net, x))
        .map(|(d, c)| d - c)
        .collect())
}

/// `G(X) = −BᵀB K diag(cos X)`.
pub fn g_matrix(x: &[f64], net: &OscillatorNetwork) -> Result<DMatrix<f64>> {
    check_len("X", x.len(), net.n_edges())?;
    let btb = crate::network::edge_laplacian(net.incidence());
    let k = net.scaled_gains();
    Ok(DMatrix::from_fn(x.len(), x.len(), |r, c| {
        -(btb[(r, c)] as f64) * k[c] * x[c].cos()
    }))
}

/// Uniformly sampled solution of the node-space ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Phases wrapped to `(−π, π]`.
    pub thetas: Vec<Vec<f64>>,
    /// `f(θ)` re-evaluated at each stored phase.
    pub theta_dots: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn edge_states<'a>(
        &'a self,
        b: &'a IncidenceMatrix,
    ) -> impl Iterator<Item = EdgeState> + 'a {
        self.thetas
            .iter()
            .zip(&self.theta_dots)
            .map(move |(t, td)| edge_transform(t, td, b))
    }

    /// Phase series of each stored step with 2π jumps removed.
    pub fn unwrapped_thetas(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.len());
        for theta in &self.thetas {
            let next = match out.last() {
                None => theta.clone(),
                Some(prev) => prev
                    .iter()
                    .zip(theta)
                    .map(|(p, t)| p + wrap_phase(t - p))
                    .collect(),
            };
            out.push(next);
        }
        out
    }

    /// Largest spread `max θ̇ − min θ̇ = ‖V‖∞` at step `k`.
    pub fn frequency_spread(&self, k: usize) -> f64 {
        spread(&self.theta_dots[k])
    }
}

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

fn validate_run(net: &OscillatorNetwork, theta0: &[f64], t_end: f64, dt: f64) -> Result<()> {
    check_len("theta0", theta0.len(), net.n())?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive and finite, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::invalid(format!(
            "t_end must be finite and at least dt, got {t_end}"
        )));
    }
    if theta0.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("initial phases must be finite"));
    }
    Ok(())
}

fn integrate<F>(net: &OscillatorNetwork, theta0: &[f64], t_end: f64, dt: f64, mut visit: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64, &[f64]),
{
    validate_run(net, theta0, t_end, dt)?;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| theta_dot_into(net, y, dy);
    let mut rk = Rk4::new(net.n());
    let mut y = theta0.to_vec();
    let steps = step_count(t_end, dt);
    visit(0, 0.0, &y);
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        rk.step(&rhs, t0, &mut y, dt);
        let t = k as f64 * dt;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: k, time: t });
        }
        visit(k, t, &y);
    }
    Ok(y)
}

/// Integrates the network with classical RK4 on unwrapped phases, storing every
/// step with phases wrapped to `(−π, π]`.
pub fn simulate(net: &OscillatorNetwork, theta0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    let cap = if dt > 0.0 && t_end.is_finite() {
        step_count(t_end, dt).saturating_add(1).min(1 << 24)
    } else {
        0
    };
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        thetas: Vec::with_capacity(cap),
        theta_dots: Vec::with_capacity(cap),
    };
    let n = net.n();
    integrate(net, theta0, t_end, dt, |_, t, y| {
        let wrapped: Vec<f64> = y.iter().copied().map(wrap_phase).collect();
        let mut td = vec![0.0; n];
        theta_dot_into(net, &wrapped, &mut td);
        traj.times.push(t);
        traj.thetas.push(wrapped);
        traj.theta_dots.push(td);
    })?;
    Ok(traj)
}

/// Unwrapped phases at `t_end`, without storing the path.
pub fn final_phases(net: &OscillatorNetwork, theta0: &[f64], t_end: f64, dt: f64) -> Result<Vec<f64>> {
    integrate(net, theta0, t_end, dt, |_, _, _| {})
}

/// Earliest stored time after which `‖V‖∞ < tol` holds at every remaining
/// step, provided that tail spans at least `hold` seconds.
pub fn sync_onset(traj: &Trajectory, tol: f64, hold: f64) -> Option<f64> {
    let mut start = None;
    for k in (0..traj.len()).rev() {
        if traj.frequency_spread(k) < tol {
            start = Some(k);
        } else {
            break;
        }
    }
    let k = start?;
    let last = *traj.times.last()?;
    (last - traj.times[k] >= hold - 1e-9).then_some(traj.times[k])
}

/// Whether the trajectory ends synchronized under the default criterion.
pub fn is_synchronized(traj: &Trajectory) -> bool {
    sync_onset(traj, SYNC_TOLERANCE, SYNC_HOLD).is_some()
}

/// Planar coordinates for the reduced phase-difference dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarReduction {
    /// Two oscillators: `(x₁, x₂) = (X, V)`.
    PhaseVelocity,
    /// Three oscillators: two of the three edge phase differences; the third
    /// follows from `X ∈ Col(Bᵀ)`.
    EdgePair(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
    /// Points per axis, endpoints included.
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x1: f64,
    pub x2: f64,
    pub dx1: f64,
    pub dx2: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

/// Samples the planar reduced vector field over a rectangular grid, row-major
/// in `x₁` then `x₂`.
pub fn vector_field_grid(
    net: &OscillatorNetwork,
    reduction: PlanarReduction,
    grid: &GridSpec,
) -> Result<Vec<FieldSample>> {
    if grid.resolution < 2 {
        return Err(Error::invalid("grid resolution must be at least 2 per axis"));
    }
    let field: Box<dyn Fn(f64, f64) -> (f64, f64)> = match (net.n(), reduction) {
        (2, PlanarReduction::PhaseVelocity) => {
            Box::new(move |x1, x2| {
                let g = g_matrix(&[x1], net).expect("one edge");
                (x2, g[(0, 0)] * x2)
            })
        }
        (3, PlanarReduction::EdgePair(a, c)) => {
            if a >= 3 || c >= 3 || a == c {
                return Err(Error::invalid(format!(
                    "edge pair ({a}, {c}) must name two distinct edges of 0..3"
                )));
            }
            let b = net.incidence();
            // θ₃ = 0; solve the 2×2 system for (θ₁, θ₂)
            let m = [
                [b.entry(0, a) as f64, b.entry(1, a) as f64],
                [b.entry(0, c) as f64, b.entry(1, c) as f64],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            Box::new(move |x1, x2| {
                let t0 = (m[1][1] * x1 - m[0][1] * x2) / det;
                let t1 = (m[0][0] * x2 - m[1][0] * x1) / det;
                let x = b.edge_differences(&[t0, t1, 0.0]);
                let v = edge_velocity(net, &x).expect("three edges");
                (v[a], v[c])
            })
        }
        (2 | 3, _) => {
            return Err(Error::invalid(format!(
                "reduction {reduction:?} does not apply to {} oscillators",
                net.n()
            )))
        }
        (n, _) => {
            return Err(Error::Unsupported(format!(
                "no planar reduction for {n} oscillators"
            )))
        }
    };
    let mut out = Vec::with_capacity(grid.resolution * grid.resolution);
    for x1 in linspace(grid.x1.0, grid.x1.1, grid.resolution) {
        for x2 in linspace(grid.x2.0, grid.x2.1, grid.resolution) {
            let (dx1, dx2) = field(x1, x2);
            out.push(FieldSample { x1, x2, dx1, dx2 });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two(omega: (f64, f64), k: f64) -> OscillatorNetwork {
        OscillatorNetwork::new(vec![omega.0, omega.1], vec![k]).unwrap()
    }

    fn three_chain() -> OscillatorNetwork {
        OscillatorNetwork::new(vec![1.0, 2.0, 3.0], vec![9.0, 6.0, 0.0]).unwrap()
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(-7.0), -7.0 + 2.0 * PI, epsilon = 1e-15);
        assert_eq!(wrap_phase(0.0), 0.0);
    }

    #[test]
    fn identical_phases_give_natural_frequencies() {
        let net = three_chain();
        assert_eq!(theta_dot(&[0.7; 3], &net).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_oscillator_hand_value() {
        let net = two((1.0, 0.0), 2.0);
        let td = theta_dot(&[PI / 2.0, 0.0], &net).unwrap();
        assert_abs_diff_eq!(td[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(td[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_dot_rejects_wrong_length() {
        assert!(matches!(
            theta_dot(&[0.0; 2], &three_chain()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn edge_transform_examples() {
        let b = crate::network::incidence_matrix(3).unwrap();
        let s = edge_transform(&[0.4; 3], &[2.0; 3], &b);
        assert_eq!(s.x, vec![0.0; 3]);
        assert_eq!(s.v, vec![0.0; 3]);
        let s = edge_transform(&[0.3, 0.1, -0.2], &[1.0, 2.0, 4.0], &b);
        for (got, want) in s.x.iter().zip([0.2, 0.5, 0.3]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_eq!(s.v, vec![-1.0, -3.0, -2.0]);
    }

    #[test]
    fn g_matrix_examples() {
        let net = three_chain();
        let g0 = g_matrix(&[0.0; 3], &net).unwrap();
        // −BᵀB K with K = diag(3, 2, 0)
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 3, &[
            -6.0, -2.0, 0.0,
            -3.0, -4.0, 0.0,
            3.0, -2.0, 0.0,
        ]);
        assert_eq!(g0, expected);
        let g = g_matrix(&[PI / 3.0], &two((0.0, 0.0), 2.0)).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn identical_frequencies_rotate_rigidly() {
        let net = OscillatorNetwork::new(vec![0.8; 3], vec![1.0, 2.0, 3.0]).unwrap();
        let traj = simulate(&net, &[0.2; 3], 5.0, 0.01).unwrap();
        let b = net.incidence();
        for (k, s) in traj.edge_states(b).enumerate() {
            let expected = wrap_phase(0.2 + 0.8 * traj.times[k]);
            for th in &traj.thetas[k] {
                assert_abs_diff_eq!(*th, expected, epsilon = 1e-12);
            }
            assert!(s.v.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn trajectory_storage_invariants() {
        let net = three_chain();
        let traj = simulate(&net, &[3.0, -2.0, 1.0], 2.0, 0.01).unwrap();
        assert_eq!(traj.len(), 201);
        for w in traj.times.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 0.01, epsilon = 1e-12);
        }
        for (th, td) in traj.thetas.iter().zip(&traj.theta_dots) {
            assert!(th.iter().all(|t| *t > -PI && *t <= PI));
            let f = theta_dot(th, &net).unwrap();
            let res = f.iter().zip(td).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-9);
        }
    }

    #[test]
    fn simulate_rejects_bad_inputs() {
        let net = three_chain();
        assert!(simulate(&net, &[0.0; 3], 1.0, 0.0).is_err());
        assert!(simulate(&net, &[0.0; 3], 0.001, 0.01).is_err());
        assert!(simulate(&net, &[f64::NAN, 0.0, 0.0], 1.0, 0.01).is_err());
        assert!(simulate(&net, &[0.0; 2], 1.0, 0.01).is_err());
    }

    #[test]
    fn simulate_reports_divergence_step() {
        let net = OscillatorNetwork::new(vec![1e308, 0.0], vec![0.0]).unwrap();
        match simulate(&net, &[0.0, 0.0], 20.0, 10.0) {
            Err(Error::Divergence { step, .. }) => assert!(step >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn two_oscillators_lock_at_arcsin() {
        // Δθ̇ = Δω − K̃ sin Δθ for two oscillators
        let net = two((0.5, 0.0), 1.0);
        let traj = simulate(&net, &[0.0, 0.0], 30.0, 0.01).unwrap();
        let last = traj.thetas.last().unwrap();
        assert_abs_diff_eq!(wrap_phase(last[0] - last[1]), PI / 6.0, epsilon = 1e-6);
    }

    #[test]
    fn unwrapping_removes_jumps() {
        let net = two((3.0, 0.0), 0.0);
        let traj = simulate(&net, &[3.0, 0.0], 4.0, 0.01).unwrap();
        let un = traj.unwrapped_thetas();
        assert_abs_diff_eq!(un.last().unwrap()[0], 15.0, epsilon = 1e-9);
    }

    #[test]
    fn sync_onset_requires_sustained_hold() {
        let mk = |spreads: &[f64]| Trajectory {
            times: (0..spreads.len()).map(|k| k as f64 * 0.5).collect(),
            thetas: vec![vec![0.0, 0.0]; spreads.len()],
            theta_dots: spreads.iter().map(|s| vec![*s, 0.0]).collect(),
        };
        assert_eq!(sync_onset(&mk(&[1.0, 1e-7, 1e-7, 1e-7]), 1e-6, 1.0), Some(0.5));
        assert_eq!(sync_onset(&mk(&[1.0, 1.0, 1e-7, 1e-7]), 1e-6, 1.0), None);
        assert_eq!(sync_onset(&mk(&[1e-7, 1.0, 1e-7, 1e-7]), 1e-6, 1.0), None);
    }

    #[test]
    fn planar_field_two_oscillators() {
        let net = two((0.0, 0.0), 1.0);
        let grid = GridSpec {
            x1: (-PI / 2.0, PI / 2.0),
            x2: (-1.0, 1.0),
            resolution: 3,
        };
        let samples = vector_field_grid(&net, PlanarReduction::PhaseVelocity, &grid).unwrap();
        assert_eq!(samples.len(), 9);
        for s in &samples {
            assert_eq!(s.dx1, s.x2);
            if s.x1 == 0.0 {
                assert_abs_diff_eq!(s.dx2, -s.x2, epsilon = 1e-15);
            } else {
                assert_abs_diff_eq!(s.dx2, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn planar_field_three_chain_matches_reduced_equations() {
        let net = three_chain();
        let grid = GridSpec {
            x1: (-PI, PI),
            x2: (-PI, PI),
            resolution: 7,
        };
        let samples = vector_field_grid(&net, PlanarReduction::EdgePair(0, 1), &grid).unwrap();
        for s in samples {
            let dx1 = -1.0 - 6.0 * s.x1.sin() - 2.0 * s.x2.sin();
            let dx2 = -2.0 - 3.0 * s.x1.sin() - 4.0 * s.x2.sin();
            assert_abs_diff_eq!(s.dx1, dx1, epsilon = 1e-12);
            assert_abs_diff_eq!(s.dx2, dx2, epsilon = 1e-12);
        }
        let at = GridSpec {
            x1: (0.0, 1.0),
            x2: (-PI / 6.0, 1.0),
            resolution: 2,
        };
        let s = vector_field_grid(&net, PlanarReduction::EdgePair(0, 1), &at).unwrap()[0];
        assert_abs_diff_eq!(s.dx1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.dx2, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn planar_field_rejects_large_networks() {
        let net = OscillatorNetwork::new(vec![0.0; 4], vec![1.0; 6]).unwrap();
        let grid = GridSpec {
            x1: (0.0, 1.0),
            x2: (0.0, 1.0),
            resolution: 2,
        };
        assert!(matches!(
            vector_field_grid(&net, PlanarReduction::EdgePair(0, 1), &grid),
            Err(Error::Unsupported(_))
        ));
        let grid1 = GridSpec { resolution: 1, ..grid };
        assert!(vector_field_grid(&three_chain(), PlanarReduction::EdgePair(0, 1), &grid1).is_err());
    }
}
