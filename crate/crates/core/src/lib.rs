//! Finite Kuramoto oscillator networks with arbitrary connected topology,
//! non-uniform symmetric coupling and non-identical natural frequencies.
//!
//! The crate simulates the node-space dynamics, maps them to edge coordinates
//! `(X, V) = (Bᵀθ, Bᵀθ̇)`, and computes the quantities used to certify phase
//! synchronization: phase-locked equilibria, linearized spectra, coupling-gain
//! bounds, invariance of the phase-cohesive set and Lyapunov decrease.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod io;
pub mod network;
pub mod ode;
pub mod two_oscillator;

pub use error::{Error, Result};
pub use network::{incidence_matrix, is_connected, IncidenceMatrix, OscillatorNetwork};
