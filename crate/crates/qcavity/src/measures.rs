//! Entanglement and correlation observables.

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, OperatorSet};
use crate::numerics::{c64, dagger, eig_herm, herm_deviation, trace, CMat, CVec, C64};
use crate::tolerances as tol;

/// Per-time observables of an open trajectory. E is dimensionless in [0, 1],
/// the spin projections sit in [-1/2, 1/2] and nphot ≥ 0, all up to 1e-8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub time: f64,
    pub e: f64,
    pub sz1: f64,
    pub sz2: f64,
    pub nphot: f64,
}

impl ObservableRecord {
    pub fn validate(&self) -> Result<()> {
        let slack = 1e-8;
        if self.e < -slack || self.e > 1.0 + slack {
            return Err(Error::InvalidDensity(format!(
                "entanglement {} outside [0, 1]",
                self.e
            )));
        }
        for (name, v) in [("sz1", self.sz1), ("sz2", self.sz2)] {
            if v < -0.5 - slack || v > 0.5 + slack {
                return Err(Error::InvalidDensity(format!(
                    "{name} = {v} outside [-1/2, 1/2]"
                )));
            }
        }
        if self.nphot < -slack {
            return Err(Error::InvalidDensity(format!(
                "photon number {} negative",
                self.nphot
            )));
        }
        Ok(())
    }
}

/// Partial trace over the cavity factor; output ordered (q1, q2) with q1
/// major.
pub fn reduce_to_qubits(rho: &CMat, space: &HilbertSpace) -> Result<CMat> {
    if rho.nrows() != space.dim || rho.ncols() != space.dim {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {}x{}, space dimension is {}",
            rho.nrows(),
            rho.ncols(),
            space.dim
        )));
    }
    let mut out = CMat::zeros((4, 4));
    for q1 in 0..2 {
        for q2 in 0..2 {
            for q1b in 0..2 {
                for q2b in 0..2 {
                    let mut acc = C64::new(0.0, 0.0);
                    for n in 0..space.n_cavity {
                        acc += rho[[space.index(q1, n, q2), space.index(q1b, n, q2b)]];
                    }
                    out[[2 * q1 + q2, 2 * q1b + q2b]] = acc;
                }
            }
        }
    }
    Ok(out)
}

fn validate_two_qubit_density(rho: &CMat) -> Result<()> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit density matrix must be 4x4, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let dev = herm_deviation(rho);
    if dev > 1e-7 {
        return Err(Error::InvalidDensity(format!(
            "Hermiticity defect {dev:.3e} in two-qubit state"
        )));
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-7 || tr.im.abs() > 1e-7 {
        return Err(Error::InvalidDensity(format!(
            "two-qubit state trace {tr} differs from 1"
        )));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// C = max(0, λ1-λ2-λ3-λ4) with λ descending square roots of the eigenvalues
/// of ρ·(σy⊗σy)·ρ*·(σy⊗σy), computed through the Hermitian form
/// √ρ ρ̃ √ρ. Accepts states whose trace differs from 1 by up to 1e-7 and
/// rescales internally.
pub fn concurrence(rho_q: &CMat) -> Result<f64> {
    validate_two_qubit_density(rho_q)?;
    let tr = trace(rho_q).re;
    let rho = (rho_q + &dagger(rho_q)).mapv(|z| z * c64(0.5 / tr, 0.0));
    // Pure states have √ρ = ρ, collapsing the spectrum of √ρ ρ̃ √ρ to the
    // single value tr(ρ ρ̃); this closed form skips both eigensolves in the
    // closed-dynamics hot loop and agrees with the general path to 1e-10.
    let purity: C64 = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| rho[[i, j]] * rho[[j, i]])
        .sum();
    if (purity.re - 1.0).abs() <= 1e-12 && purity.im.abs() <= 1e-12 {
        // tr(ρ ρ̃) with ρ̃ = (σy⊗σy) ρ* (σy⊗σy); σy⊗σy = antidiag(-1,1,1,-1)
        let sigma = [3usize, 2, 1, 0];
        let sign = [-1.0, 1.0, 1.0, -1.0];
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += rho[[i, j]] * rho[[sigma[j], sigma[i]]].conj() * c64(sign[i] * sign[j], 0.0);
            }
        }
        return Ok(acc.re.max(0.0).sqrt());
    }
    let (vals, vecs) = eig_herm(&rho)?;
    if vals[0] < tol::DENSITY_MIN_EIG {
        return Err(Error::InvalidDensity(format!(
            "two-qubit state eigenvalue {:.3e} below {:.1e}",
            vals[0],
            tol::DENSITY_MIN_EIG
        )));
    }
    let sqrt_rho = {
        let mut scaled = vecs.clone();
        for (mut col, l) in scaled.columns_mut().into_iter().zip(vals.iter()) {
            let s = l.max(0.0).sqrt();
            col.mapv_inplace(|z| z * c64(s, 0.0));
        }
        scaled.dot(&dagger(&vecs))
    };
    let yy = sigma_y_sigma_y();
    let rho_tilde = yy.dot(&rho.mapv(|z| z.conj())).dot(&yy);
    let m = sqrt_rho.dot(&rho_tilde).dot(&sqrt_rho);
    let m = (&m + &dagger(&m)).mapv(|z| z * c64(0.5, 0.0));
    let (mvals, _) = eig_herm(&m)?;
    let mut lambdas: Vec<f64> = mvals.iter().map(|l| l.max(0.0).sqrt()).collect();
    lambdas.reverse(); // descending
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.max(0.0))
}

fn sigma_y_sigma_y() -> CMat {
    let mut y = CMat::zeros((2, 2));
    y[[0, 1]] = c64(0.0, -1.0);
    y[[1, 0]] = c64(0.0, 1.0);
    ndarray::linalg::kron(&y, &y)
}

/// Real expectation value tr(ρ·op) of a Hermitian operator.
pub fn expectation(rho: &CMat, op: &CMat) -> Result<f64> {
    let dev = herm_deviation(op);
    if dev > tol::HERMITICITY {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol: tol::HERMITICITY,
        });
    }
    if rho.nrows() != op.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs operator dimension {}",
            rho.nrows(),
            op.nrows()
        )));
    }
    let val = trace(&rho.dot(op));
    if val.im.abs() > tol::EXPECTATION_IMAG {
        return Err(Error::ComplexExpectation { imag: val.im });
    }
    Ok(val.re)
}

/// Steady-state qubit-photon cross-correlation
/// C_ss = (1/2) Σ_i ⟨s_i^z a†a⟩ / (⟨s_i^z⟩⟨a†a⟩), signs retained.
///
/// Errors with [`Error::UndefinedCorrelation`] when ⟨a†a⟩ or either ⟨s_i^z⟩
/// underflows the guard (vacuum cavity or unpolarized qubit).
pub fn cross_correlation(rho_ss: &CMat, ops: &OperatorSet) -> Result<f64> {
    let nbar = expectation(rho_ss, &ops.n_phot)?;
    if nbar.abs() <= tol::CORRELATION_DENOM {
        return Err(Error::UndefinedCorrelation(format!(
            "cavity occupation {nbar:.3e} below guard"
        )));
    }
    let mut acc = 0.0;
    for i in 0..2 {
        let sz = expectation(rho_ss, &ops.sz[i])?;
        if sz.abs() <= tol::CORRELATION_DENOM {
            return Err(Error::UndefinedCorrelation(format!(
                "qubit {} polarization {sz:.3e} below guard",
                i + 1
            )));
        }
        // s_i^z and a†a act on distinct factors, so the product is Hermitian
        let joint = expectation(rho_ss, &ops.sz[i].dot(&ops.n_phot))?;
        acc += joint / (sz * nbar);
    }
    Ok(0.5 * acc)
}

/// Maximum of an entanglement series with parabolic refinement through the
/// three points around the discrete peak; ties break to the earliest time.
pub fn peak_entanglement(times: &[f64], es: &[f64]) -> Result<(f64, f64)> {
    if times.is_empty() || es.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if times.len() != es.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} times vs {} samples",
            times.len(),
            es.len()
        )));
    }
    let mut k = 0usize;
    for (i, e) in es.iter().enumerate() {
        if *e > es[k] {
            k = i;
        }
    }
    let (mut e_p, mut t_p) = (es[k], times[k]);
    if k > 0 && k + 1 < es.len() {
        let (t0, t1, t2) = (times[k - 1], times[k], times[k + 1]);
        let (e0, e1, e2) = (es[k - 1], es[k], es[k + 1]);
        let d1 = (e1 - e0) / (t1 - t0);
        let d2 = (e2 - e1) / (t2 - t1);
        let curv = 2.0 * (d2 - d1) / (t2 - t0);
        if curv < 0.0 {
            let t_star = (t0 + t1) / 2.0 - d1 / curv;
            if t_star >= t0 && t_star <= t2 {
                // interpolating parabola evaluated at its vertex
                let l0 = (t_star - t1) * (t_star - t2) / ((t0 - t1) * (t0 - t2));
                let l1 = (t_star - t0) * (t_star - t2) / ((t1 - t0) * (t1 - t2));
                let l2 = (t_star - t0) * (t_star - t1) / ((t2 - t0) * (t2 - t1));
                let refined = e0 * l0 + e1 * l1 + e2 * l2;
                if refined > e_p {
                    e_p = refined.min(1.0);
                    t_p = t_star;
                }
            }
        }
    }
    Ok((e_p, t_p))
}

/// Trace distance (1/2)‖ρ - σ‖₁ between density matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a - b;
    let herm = (&diff + &dagger(&diff)).mapv(|z| z * c64(0.5, 0.0));
    let (vals, _) = eig_herm(&herm)?;
    Ok(0.5 * vals.iter().map(|l| l.abs()).sum::<f64>())
}

/// Density matrix of the pure qubit-pair state c10|10⟩ + c01|01⟩ in the
/// (q1, q2) product ordering.
pub fn qubit_pair_pure(c10: C64, c01: C64) -> CMat {
    let mut psi = CVec::zeros(4);
    psi[2] = c10; // |10⟩: q1 excited
    psi[1] = c01; // |01⟩: q2 excited
    let norm = (c10.norm_sqr() + c01.norm_sqr()).sqrt();
    psi.mapv_inplace(|z| z / c64(norm, 0.0));
    let mut rho = CMat::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            rho[[i, j]] = psi[i] * psi[j].conj();
        }
    }
    rho
}

/// Full observable record from a tripartite density matrix.
pub fn record_from_density(
    time: f64,
    rho: &CMat,
    ops: &OperatorSet,
    space: &HilbertSpace,
) -> Result<ObservableRecord> {
    let rq = reduce_to_qubits(rho, space)?;
    let rec = ObservableRecord {
        time,
        e: concurrence(&rq)?,
        sz1: expectation(rho, &ops.sz[0])?,
        sz2: expectation(rho, &ops.sz[1])?,
        nphot: expectation(rho, &ops.n_phot)?,
    };
    rec.validate()?;
    Ok(rec)
}
