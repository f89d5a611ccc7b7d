//! Linearization about `(X*, 0)` and spectral classification.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::g_matrix;
use crate::error::Result;
use crate::network::OscillatorNetwork;

pub const DEFAULT_TOL_ZERO: f64 = 1e-9;
/// Relative singular-value cutoff for numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    SemistableCandidate,
    Unstable,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub equilibrium_x: Vec<f64>,
    /// Spectrum of the `2e × 2e` linearization.
    pub eigenvalues: Vec<Complex64>,
    /// Spectrum of `G(X*)` restricted to `Col(Bᵀ)`, the dynamically relevant part.
    pub restricted_eigenvalues: Vec<Complex64>,
    pub n_zero: usize,
    /// `2e − (N − 1)`: ambient zeros of `A` plus the null space of `G` on a
    /// connected graph.
    pub expected_zero: usize,
    pub classification: Classification,
}

/// Block matrix `[[0, I], [0, G(X*)]]` of the linearized edge dynamics.
pub fn linearize(net: &OscillatorNetwork, x_star: &[f64]) -> Result<DMatrix<f64>> {
    let g = g_matrix(x_star, net)?;
    let e = g.nrows();
    let mut a = DMatrix::zeros(2 * e, 2 * e);
    for i in 0..e {
        a[(i, e + i)] = 1.0;
    }
    a.view_mut((e, e), (e, e)).copy_from(&g);
    Ok(a)
}

/// Orthonormal basis of `Col(Bᵀ)`, one column per non-pinned vertex.
pub fn column_space_basis(net: &OscillatorNetwork) -> DMatrix<f64> {
    let n = net.n();
    let bt = net.incidence().to_dense().transpose();
    // dropping the last vertex column leaves a full-rank spanning set
    let spanning = bt.columns(0, n - 1).into_owned();
    spanning.qr().q()
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let smax = sv.max();
    if smax.is_nan() || smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * smax).count()
}

/// Whether `G(X) v = 0` has no nonzero solution `v ∈ Col(Bᵀ)`, tested as
/// `rank(G(X) Q) = N − 1` for an orthonormal basis `Q` of `Col(Bᵀ)`.
pub fn nontangency_rank_test(net: &OscillatorNetwork, x: &[f64]) -> Result<bool> {
    let g = g_matrix(x, net)?;
    let q = column_space_basis(net);
    Ok(numerical_rank(&(g * q)) == net.n() - 1)
}

/// Classifies `(X*, 0)` from the spectrum of the linearization.
///
/// Since `A` is block upper-triangular its spectrum is `e` zeros together with
/// the spectrum of `G(X*)`; taking it from that structure avoids smearing the
/// defective zero eigenvalues of `A`.
pub fn classify_stability(
    net: &OscillatorNetwork,
    x_star: &[f64],
    tol_zero: f64,
) -> Result<StabilityReport> {
    let g = g_matrix(x_star, net)?;
    let e = g.nrows();
    let a_norm = (g.norm_squared() + e as f64).sqrt();
    let tol = tol_zero * a_norm.max(1.0);

    let mut eigenvalues = vec![Complex64::new(0.0, 0.0); e];
    eigenvalues.extend(g.complex_eigenvalues().iter().copied());

    let q = column_space_basis(net);
    let restricted = q.transpose() * &g * &q;
    let restricted_eigenvalues: Vec<Complex64> =
        restricted.complex_eigenvalues().iter().copied().collect();

    let n_zero = eigenvalues.iter().filter(|l| l.norm() < tol).count();
    let expected_zero = 2 * e - (net.n() - 1);
    let in_box = x_star.iter().all(|x| x.abs() < FRAC_PI_2);
    let all_settled = eigenvalues
        .iter()
        .all(|l| l.norm() < tol || l.re < -tol);

    let classification = if eigenvalues.iter().any(|l| l.re > tol) {
        Classification::Unstable
    } else if in_box && all_settled && n_zero == expected_zero {
        Classification::SemistableCandidate
    } else {
        Classification::Indeterminate
    };

    Ok(StabilityReport {
        equilibrium_x: x_star.to_vec(),
        eigenvalues,
        restricted_eigenvalues,
        n_zero,
        expected_zero,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn two_oscillator_linearization() {
        let net = OscillatorNetwork::new(vec![0.0, 0.0], vec![2.0]).unwrap();
        let a = linearize(&net, &[0.0]).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, -2.0]));
        let mut eig: Vec<f64> = a.complex_eigenvalues().iter().map(|l| l.re).collect();
        eig.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(eig[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quarter_turn_kills_column() {
        let net = OscillatorNetwork::new(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        let a = linearize(&net, &[0.3, PI / 2.0, -0.2]).unwrap();
        for r in 3..6 {
            assert!(a[(r, 4)].abs() < 1e-14);
        }
    }

    #[test]
    fn structured_spectrum_matches_dense_eigensolver() {
        let net = OscillatorNetwork::new(vec![1.0, 2.0, 3.0, 0.5], vec![4.0, 3.0, 0.0, 5.0, 2.0, 6.0])
            .unwrap();
        let x = net.incidence().edge_differences(&[0.2, -0.1, 0.3, 0.0]);
        let report = classify_stability(&net, &x, DEFAULT_TOL_ZERO).unwrap();
        let dense = linearize(&net, &x).unwrap().complex_eigenvalues();
        assert_eq!(report.eigenvalues.len(), dense.len());
        let mut a: Vec<f64> = report.eigenvalues.iter().map(|l| l.re).collect();
        let mut b: Vec<f64> = dense.iter().map(|l| l.re).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (p, q) in a.iter().zip(&b) {
            // zero eigenvalues of A are defective, so the dense solver only
            // resolves them to about sqrt(eps)
            assert_abs_diff_eq!(p, q, epsilon = 1e-6);
        }
    }

    #[test]
    fn unstable_locked_state_of_pair() {
        let net = OscillatorNetwork::new(vec![0.5, 0.0], vec![1.0]).unwrap();
        let r = classify_stability(&net, &[PI - PI / 6.0], DEFAULT_TOL_ZERO).unwrap();
        assert_eq!(r.classification, Classification::Unstable);
        assert_abs_diff_eq!(r.eigenvalues[1].re, (PI / 6.0).cos(), epsilon = 1e-12);
    }

    #[test]
    fn in_phase_state_zero_count() {
        for gains in [vec![1.0, 2.0, 0.0], vec![1.0; 3]] {
            let net = OscillatorNetwork::new(vec![0.0; 3], gains).unwrap();
            let r = classify_stability(&net, &[0.0; 3], DEFAULT_TOL_ZERO).unwrap();
            assert_eq!(r.classification, Classification::SemistableCandidate);
            assert_eq!(r.n_zero, 2 * 3 - 2);
            assert_eq!(r.restricted_eigenvalues.len(), 2);
            assert!(r.restricted_eigenvalues.iter().all(|l| l.re < 0.0));
        }
    }

    #[test]
    fn disconnected_graph_is_indeterminate() {
        let net = OscillatorNetwork::new(vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap();
        let r = classify_stability(&net, &[0.0; 3], DEFAULT_TOL_ZERO).unwrap();
        assert_eq!(r.classification, Classification::Indeterminate);
    }

    #[test]
    fn rank_test_examples() {
        let connected = OscillatorNetwork::new(vec![0.0; 3], vec![1.0, 1.0, 0.0]).unwrap();
        assert!(nontangency_rank_test(&connected, &[0.0; 3]).unwrap());
        let split = OscillatorNetwork::new(vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(!nontangency_rank_test(&split, &[0.0; 3]).unwrap());
        let empty = OscillatorNetwork::new(vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!(!nontangency_rank_test(&empty, &[0.0; 3]).unwrap());
    }

    #[test]
    fn basis_is_orthonormal_and_spans_differences() {
        let net = OscillatorNetwork::new(vec![0.0; 5], vec![1.0; 10]).unwrap();
        let q = column_space_basis(&net);
        assert_eq!(q.shape(), (10, 4));
        let qtq = q.transpose() * &q;
        assert!((qtq - DMatrix::identity(4, 4)).amax() < 1e-12);
        let x = DMatrix::from_column_slice(
            10,
            1,
            &net.incidence().edge_differences(&[0.3, -1.0, 2.0, 0.5, 0.1]),
        );
        let resid = &x - &q * (q.transpose() * &x);
        assert!(resid.amax() < 1e-12);
    }
}
