//! Synchronization analysis for N-oscillator networks in edge coordinates.

pub mod bounds;
pub mod equilibrium;
pub mod invariance;
pub mod lyapunov;
pub mod stability;

pub use bounds::{
    attracting_set_check, coupling_bounds, meets_sufficient_bounds, onset_lower_bounds,
    sufficient_gain_bounds, uniform_critical_gain, AttractingCheck, CouplingBounds,
};
pub use equilibrium::{solve_equilibrium, sync_frequency, Equilibrium};
pub use invariance::{
    column_space_residual, in_set_h, invariance_certificate, sample_cohesive_phases,
    CertificateOptions, HMembership, InvarianceReport, SampleOutcome,
};
pub use lyapunov::{
    lyapunov_v2, lyapunov_v2_along, lyapunov_v3, lyapunov_v3_rate, max_v2_increase,
};
pub use stability::{
    classify_stability, column_space_basis, linearize, nontangency_rank_test, Classification,
    StabilityReport, DEFAULT_TOL_ZERO,
};
