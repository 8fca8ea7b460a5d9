//! Simulation and analysis toolkit for a pair of qubits coupled to a common
//! cavity mode.
//!
//! The crate builds the tripartite qubit–cavity–qubit Hilbert space, the full
//! and dispersive-effective Hamiltonians, and the Lindblad generator for the
//! driven-dissipative system, and extracts entanglement observables from
//! closed trajectories and open-system steady states:
//!
//! * [`numerics`] — dense complex linear algebra (Kronecker products, matrix
//!   exponentials, Hermitian eigendecomposition, numerical null spaces).
//! * [`hilbert`] — the `|q1, n, q2⟩` basis and embedded ladder/spin operators.
//! * [`model`] — Hamiltonians (full, effective two-level block, rotating
//!   frame) and the vectorized Liouvillian.
//! * [`dynamics`] — closed/open time evolution and steady-state solves.
//! * [`measures`] — concurrence, expectation values, cross-correlation.
//! * [`analysis`] — closed-form threshold results, sweep engine, feature
//!   extraction.
//! * [`config`] / [`commands`] — the `qcavity` command-line front end.

extern crate blas_src;

pub mod analysis;
pub mod commands;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod measures;
pub mod model;
pub mod numerics;
pub mod tolerances;

pub use error::{Error, Result};
pub use numerics::{CMat, CVec, C64};
