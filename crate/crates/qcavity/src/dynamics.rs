//! Time evolution (closed and open) and steady-state solution.
//!
//! Closed evolution diagonalizes the Hamiltonian once and applies phases at
//! each grid point. Open evolution integrates vec(ρ) with fixed-step
//! classical Runge-Kutta; the default step resolves the fastest phase to
//! about 1% per step. Steady states come from the Liouvillian null space —
//! the dispersive exchange J ~ g1 g2/δ makes long-time relaxation slow, so a
//! direct solve is orders of magnitude faster; time integration is kept as a
//! test oracle only.

use crate::error::{Error, Result};
use crate::measures;
use crate::model::{self, ModelParams};
use crate::numerics::{
    c64, dagger, eig_herm, herm_deviation, matvec, null_vectors, trace, unvectorize, vec_norm,
    vectorize, CMat, CVec,
};
use crate::tolerances as tol;

/// Uniform grid of `n` points from 0 to `t_max` inclusive.
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "time grid needs at least two points");
    let dt = t_max / (n - 1) as f64;
    (0..n).map(|k| k as f64 * dt).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "trajectory times must be strictly increasing".into(),
        ));
    }
    if times[0] < 0.0 {
        return Err(Error::InvalidParams("trajectory times must be >= 0".into()));
    }
    Ok(())
}

/// Pure-state trajectory on a fixed time grid.
#[derive(Debug, Clone)]
pub struct ClosedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVec>,
}

/// Density-matrix trajectory on a fixed output grid.
#[derive(Debug, Clone)]
pub struct OpenTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
}

/// Evolve |ψ(t)⟩ = e^{-iHt}|ψ0⟩ on the given grid (one eigendecomposition,
/// then phase application). Norm is preserved to 1e-9.
pub fn evolve_closed(h: &CMat, psi0: &CVec, times: &[f64]) -> Result<ClosedTrajectory> {
    check_times(times)?;
    if psi0.len() != h.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "state length {} vs Hamiltonian dimension {}",
            psi0.len(),
            h.nrows()
        )));
    }
    let norm0 = vec_norm(psi0);
    if (norm0 - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParams(format!(
            "initial state norm {norm0} is not 1"
        )));
    }
    let (vals, vecs) = eig_herm(h)?;
    let vdag = dagger(&vecs);
    let coeffs = matvec(&vdag, psi0);
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let phased =
            CVec::from_shape_fn(coeffs.len(), |k| coeffs[k] * c64(0.0, -vals[k] * t).exp());
        let psi = matvec(&vecs, &phased);
        let drift = (vec_norm(&psi) - norm0).abs();
        if drift > tol::CLOSED_NORM_DRIFT {
            return Err(Error::InvalidParams(format!(
                "norm drift {drift:.3e} during closed evolution"
            )));
        }
        states.push(psi);
    }
    Ok(ClosedTrajectory {
        times: times.to_vec(),
        states,
    })
}

/// Default integration step 0.01/max(spectral scale of H', κ, γ, d), with the
/// spectral radius estimated by the max row sum of H'.
pub fn default_step(h_rot: &CMat, p: &ModelParams) -> f64 {
    let mut inf_norm: f64 = 0.0;
    for row in h_rot.rows() {
        inf_norm = inf_norm.max(row.iter().map(|z| z.norm()).sum());
    }
    let scale = inf_norm.max(p.kappa).max(p.gamma).max(p.drive).max(1e-3);
    0.01 / scale
}

/// Validate the stored density-matrix invariants: Hermitian to 1e-9, unit
/// trace to 1e-9, eigenvalues above -1e-8 (violations are hard errors, never
/// clipped).
pub fn validate_density(rho: &CMat) -> Result<()> {
    let dev = herm_deviation(rho);
    if dev > tol::DENSITY_HERMITICITY {
        return Err(Error::InvalidDensity(format!(
            "Hermiticity defect {dev:.3e}"
        )));
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > tol::DENSITY_TRACE || tr.im.abs() > tol::DENSITY_TRACE {
        return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
    }
    let sym = (rho + &dagger(rho)).mapv(|z| z * c64(0.5, 0.0));
    let (vals, _) = eig_herm(&sym)?;
    if vals[0] < tol::DENSITY_MIN_EIG {
        return Err(Error::InvalidDensity(format!(
            "eigenvalue {:.3e} below {:.1e}",
            vals[0],
            tol::DENSITY_MIN_EIG
        )));
    }
    Ok(())
}

/// Fixed-step RK4 on vec(ρ) hitting every output time exactly (each output
/// interval is subdivided uniformly with sub-steps ≤ `step`).
///
/// The Hermitian part is enforced by symmetrization at output points only;
/// trace drift beyond 1e-8 rejects the step size (the caller must reduce it).
pub fn evolve_open(l: &CMat, rho0: &CMat, times: &[f64], step: f64) -> Result<OpenTrajectory> {
    check_times(times)?;
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidParams(format!(
            "step must be > 0, got {step}"
        )));
    }
    if l.nrows() != rho0.len() {
        return Err(Error::DimensionMismatch(format!(
            "Liouvillian dimension {} vs vectorized state length {}",
            l.nrows(),
            rho0.len()
        )));
    }
    validate_density(rho0)?;
    let tr0 = trace(rho0).re;
    let mut v = vectorize(rho0);
    let mut t_now = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let mut out_times = Vec::with_capacity(times.len());

    let mut record = |v: &CVec, t: f64, states: &mut Vec<CMat>| -> Result<()> {
        let rho = unvectorize(v)?;
        let rho = (&rho + &dagger(&rho)).mapv(|z| z * c64(0.5, 0.0));
        let drift = (trace(&rho).re - tr0).abs();
        if drift > tol::TRACE_DRIFT {
            return Err(Error::TraceDrift {
                drift,
                bound: tol::TRACE_DRIFT,
            });
        }
        validate_density(&rho)?;
        states.push(rho);
        out_times.push(t);
        Ok(())
    };

    for &t_target in times {
        let span = t_target - t_now;
        if span > 0.0 {
            let n_sub = (span / step).ceil().max(1.0) as usize;
            let h = span / n_sub as f64;
            for _ in 0..n_sub {
                rk4_step(l, &mut v, h);
            }
            t_now = t_target;
        }
        record(&v, t_target, &mut states)?;
    }
    Ok(OpenTrajectory {
        times: out_times,
        states,
    })
}

fn rk4_step(l: &CMat, v: &mut CVec, h: f64) {
    let hc = c64(h, 0.0);
    let k1 = matvec(l, v);
    let k2 = matvec(l, &(v.clone() + k1.mapv(|z| z * hc * 0.5)));
    let k3 = matvec(l, &(v.clone() + k2.mapv(|z| z * hc * 0.5)));
    let k4 = matvec(l, &(v.clone() + k3.mapv(|z| z * hc)));
    let sixth = hc / 6.0;
    *v = v.clone() + (k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * sixth);
}

/// Steady state with its residual ‖L·vec(ρ_ss)‖.
#[derive(Debug, Clone)]
pub struct SteadySolution {
    pub rho: CMat,
    pub residual: f64,
}

/// Solve L·vec(ρ) = 0, renormalize to unit trace, and verify the density
/// invariants and the absolute residual bound. A degenerate null space is
/// reported, never silently resolved.
pub fn steady_state(l: &CMat) -> Result<SteadySolution> {
    let nulls = null_vectors(l)?;
    if nulls.len() > 1 {
        return Err(Error::DegenerateNullSpace { found: nulls.len() });
    }
    let v = &nulls[0];
    let raw = unvectorize(v)?;
    let tr = trace(&raw);
    let dim_scale = (raw.nrows() as f64).sqrt().recip();
    if tr.norm() < 1e-6 * dim_scale {
        return Err(Error::InvalidDensity(
            "null direction is traceless; no physical steady state".into(),
        ));
    }
    // rotate the global phase so the trace is real and positive, then
    // Hermitize and normalize
    let phase = tr / tr.norm();
    let rotated = raw.mapv(|z| z / phase);
    let herm = (&rotated + &dagger(&rotated)).mapv(|z| z * c64(0.5, 0.0));
    let tr_h = trace(&herm).re;
    let rho = herm.mapv(|z| z / c64(tr_h, 0.0));
    let residual = vec_norm(&matvec(l, &vectorize(&rho)));
    if residual > tol::STEADY_RESIDUAL_ABS {
        return Err(Error::SteadyResidual {
            residual,
            bound: tol::STEADY_RESIDUAL_ABS,
        });
    }
    validate_density(&rho)?;
    Ok(SteadySolution { rho, residual })
}

/// Recompute the steady-state entanglement at truncations N_c and N_c + 2;
/// converged when they agree to 1e-6.
pub fn truncation_converged(p: &ModelParams, n_cavity: usize) -> Result<bool> {
    if n_cavity < 4 {
        return Err(Error::InvalidParams(format!(
            "truncation check needs N_c >= 4, got {n_cavity}"
        )));
    }
    let e_at = |n_c: usize| -> Result<f64> {
        let (space, ops) = crate::hilbert::build_space(n_c)?;
        let l = model::liouvillian(p, &ops)?;
        let ss = steady_state(&l)?;
        let rq = measures::reduce_to_qubits(&ss.rho, &space)?;
        measures::concurrence(&rq)
    };
    let e_lo = e_at(n_cavity)?;
    let e_hi = e_at(n_cavity + 2)?;
    Ok((e_lo - e_hi).abs() <= tol::TRUNCATION_DELTA)
}
