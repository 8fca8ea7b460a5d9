//! Hamiltonians (full, dispersive-effective, rotating-frame) and the
//! vectorized Lindblad generator.
//!
//! All rates are angular frequencies in units of g1 with ħ = 1. The full
//! model is
//!
//! ```text
//! H = ω a†a + ε Σ_i s_i^z + Σ_i g_i (a† s_i^- + h.c.)
//! ```
//!
//! and in the frame rotating at the drive frequency the second qubit picks up
//! the drive term d(s_2^+ + s_2^-). Open-system evolution is generated by
//!
//! ```text
//! ρ̇ = -i[H', ρ] + κ 𝓛[a] + γ Σ_j 𝓛[s_j^-],   𝓛[o]ρ = (2 o ρ o† - o†o ρ - ρ o†o)/2
//! ```
//!
//! vectorized column-major: L = -i(I⊗H' - H'ᵀ⊗I) + dissipator images.

use crate::error::{Error, Result};
use crate::hilbert::OperatorSet;
use crate::numerics::{c64, dagger, identity, kron, CMat};
use crate::tolerances as tol;

/// Physical rates in units of g1 (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Cavity frequency ω.
    pub omega: f64,
    /// Qubit frequency ε (both qubits).
    pub epsilon: f64,
    /// Qubit-cavity couplings.
    pub g1: f64,
    pub g2: f64,
    /// Drive frequency ω_d.
    pub omega_d: f64,
    /// Drive strength d, applied to the second qubit only.
    pub drive: f64,
    /// Cavity decay rate κ.
    pub kappa: f64,
    /// Qubit decay rate γ.
    pub gamma: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.g1 <= 0.0 || !self.g1.is_finite() {
            return Err(Error::InvalidParams(format!(
                "g1 must be > 0, got {}",
                self.g1
            )));
        }
        for (name, v) in [
            ("g2", self.g2),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("d", self.drive),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Qubit-cavity detuning δ = ε - ω.
    pub fn delta(&self) -> f64 {
        self.epsilon - self.omega
    }

    /// Dispersive-regime guard |δ| ≥ 10·max(g̃1, g̃2); a warning condition,
    /// not an error.
    pub fn dispersive_ok(&self, n_ph: usize) -> bool {
        let c = (2 * n_ph + 1) as f64;
        let g_max = self.g1.max(self.g2) * c.sqrt();
        self.delta().abs() >= tol::DISPERSIVE_FACTOR * g_max
    }
}

/// Photon-number-renormalized quantities of the dispersive expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub n_ph: usize,
    /// c = 2 N_ph + 1 (odd).
    pub c: f64,
    /// g̃_j = g_j √c.
    pub g_t1: f64,
    pub g_t2: f64,
    /// δ = ε - ω (nonzero).
    pub delta: f64,
    /// δ̃ = δ c.
    pub delta_tilde: f64,
}

impl EffectiveParams {
    pub fn new(n_ph: usize, delta: f64, g1: f64, g2: f64) -> Result<Self> {
        if delta == 0.0 {
            return Err(Error::InvalidParams(
                "dispersive model undefined at resonance (delta = 0)".into(),
            ));
        }
        if g1 <= 0.0 || !g1.is_finite() || g2 < 0.0 || !g2.is_finite() {
            return Err(Error::InvalidParams(format!(
                "couplings must satisfy g1 > 0, g2 >= 0; got g1 = {g1}, g2 = {g2}"
            )));
        }
        let c = (2 * n_ph + 1) as f64;
        Ok(Self {
            n_ph,
            c,
            g_t1: g1 * c.sqrt(),
            g_t2: g2 * c.sqrt(),
            delta,
            delta_tilde: delta * c,
        })
    }

    pub fn from_params(p: &ModelParams, n_ph: usize) -> Result<Self> {
        p.validate()?;
        Self::new(n_ph, p.delta(), p.g1, p.g2)
    }

    /// Excitation-exchange coupling J = g̃1 g̃2 / δ̃ = g1 g2 / δ.
    pub fn exchange_coupling(&self) -> f64 {
        self.g_t1 * self.g_t2 / self.delta_tilde
    }

    /// Differential Stark shift Δ = (g̃1² - g̃2²)/(2δ).
    pub fn stark_splitting(&self) -> f64 {
        (self.g_t1 * self.g_t1 - self.g_t2 * self.g_t2) / (2.0 * self.delta)
    }
}

/// Full model Hamiltonian H = ω a†a + ε Σ s_i^z + Σ g_i (a†s_i^- + h.c.).
pub fn h_model(p: &ModelParams, ops: &OperatorSet) -> CMat {
    let mut h = ops.n_phot.mapv(|z| z * c64(p.omega, 0.0));
    for i in 0..2 {
        h += &ops.sz[i].mapv(|z| z * c64(p.epsilon, 0.0));
    }
    for (i, g) in [p.g1, p.g2].into_iter().enumerate() {
        let jc = ops.a_dag.dot(&ops.sm[i]);
        let coupling = (&jc + &dagger(&jc)).mapv(|z| z * c64(g, 0.0));
        h += &coupling;
    }
    h
}

/// Effective two-level block in the basis {|10⟩_q, |01⟩_q}: Stark splitting
/// ±Δ on the diagonal (s^z = ±1/2 convention, traceless) and exchange J off
/// the diagonal.
pub fn h_effective(eff: &EffectiveParams) -> CMat {
    let delta_split = eff.stark_splitting();
    let j = eff.exchange_coupling();
    let mut h = CMat::zeros((2, 2));
    h[[0, 0]] = c64(delta_split, 0.0);
    h[[1, 1]] = c64(-delta_split, 0.0);
    h[[0, 1]] = c64(j, 0.0);
    h[[1, 0]] = c64(j, 0.0);
    h
}

/// Rotating-frame Hamiltonian
/// H' = (ω-ω_d) a†a + (ε-ω_d) Σ s_i^z + couplings + d (s_2^+ + s_2^-).
pub fn h_rotating(p: &ModelParams, ops: &OperatorSet) -> CMat {
    let mut h = ops.n_phot.mapv(|z| z * c64(p.omega - p.omega_d, 0.0));
    for i in 0..2 {
        h += &ops.sz[i].mapv(|z| z * c64(p.epsilon - p.omega_d, 0.0));
    }
    for (i, g) in [p.g1, p.g2].into_iter().enumerate() {
        let jc = ops.a_dag.dot(&ops.sm[i]);
        let coupling = (&jc + &dagger(&jc)).mapv(|z| z * c64(g, 0.0));
        h += &coupling;
    }
    let drive_term = (&ops.sp[1] + &ops.sm[1]).mapv(|z| z * c64(p.drive, 0.0));
    h += &drive_term;
    h
}

/// Superoperator of the commutator part, -i(I⊗H - Hᵀ⊗I) on column-stacked ρ.
pub fn hamiltonian_superop(h: &CMat) -> Result<CMat> {
    let n = h.nrows();
    let id = identity(n);
    let left = kron(&id, h)?;
    let right = kron(&h.t().to_owned(), &id)?;
    Ok((left - right).mapv(|z| z * c64(0.0, -1.0)))
}

/// Superoperator image of the decay channel `𝓛[o]ρ = (2oρo† - o†oρ - ρo†o)/2`.
pub fn dissipator_superop(op: &CMat) -> Result<CMat> {
    let n = op.nrows();
    let id = identity(n);
    let od_o = dagger(op).dot(op);
    let jump = kron(&op.mapv(|z| z.conj()), op)?;
    let left = kron(&id, &od_o)?;
    let right = kron(&od_o.t().to_owned(), &id)?;
    Ok(jump - (left + right).mapv(|z| z * c64(0.5, 0.0)))
}

/// Lindblad generator L acting on column-vectorized ρ, built from the
/// rotating-frame Hamiltonian plus cavity and qubit decay channels.
pub fn liouvillian(p: &ModelParams, ops: &OperatorSet) -> Result<CMat> {
    p.validate()?;
    let mut l = hamiltonian_superop(&h_rotating(p, ops))?;
    if p.kappa != 0.0 {
        l += &dissipator_superop(&ops.a)?.mapv(|z| z * c64(p.kappa, 0.0));
    }
    if p.gamma != 0.0 {
        for i in 0..2 {
            l += &dissipator_superop(&ops.sm[i])?.mapv(|z| z * c64(p.gamma, 0.0));
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_state, build_space};
    use crate::numerics::{
        herm_deviation, matvec, trace, unvectorize, vec_norm, vectorize, CVec, C64,
    };

    fn fig4_params() -> ModelParams {
        ModelParams {
            omega: 50.0,
            epsilon: 10.0,
            g1: 1.0,
            g2: 1.0,
            omega_d: 9.99,
            drive: 0.01,
            kappa: 1.0,
            gamma: 0.005,
        }
    }

    fn random_hermitian(dim: usize, seed: u64) -> CMat {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) - 0.5
        };
        let a = CMat::from_shape_fn((dim, dim), |_| c64(next(), next()));
        (&a + &dagger(&a)).mapv(|z| z * c64(0.5, 0.0))
    }

    fn braket(bra: &CVec, m: &CMat, ket: &CVec) -> C64 {
        let mk = matvec(m, ket);
        bra.iter().zip(mk.iter()).map(|(b, x)| b.conj() * x).sum()
    }

    #[test]
    fn h_model_diagonal_element() {
        // ⟨0,1,1|H|0,1,1⟩ = ω: photon term ω·1, qubit z-terms cancel
        let p = fig4_params();
        let (space, ops) = build_space(4).unwrap();
        let h = h_model(&p, &ops);
        let v = basis_state(&space, 0, 1, 1).unwrap();
        let e = braket(&v, &h, &v);
        assert!((e - c64(p.omega, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn h_model_coupling_element() {
        // ⟨0,1,q2|H|1,0,q2⟩ = g1 (a† acting on the vacuum)
        let mut p = fig4_params();
        p.g1 = 1.3;
        let (space, ops) = build_space(4).unwrap();
        let h = h_model(&p, &ops);
        for q2 in 0..2 {
            let bra = basis_state(&space, 0, 1, q2).unwrap();
            let ket = basis_state(&space, 1, 0, q2).unwrap();
            let e = braket(&bra, &h, &ket);
            assert!((e - c64(p.g1, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn h_model_decoupled_is_diagonal() {
        let mut p = fig4_params();
        p.g1 = f64::MIN_POSITIVE; // validate() wants g1 > 0; couplings vanish numerically
        p.g2 = 0.0;
        let (_, ops) = build_space(3).unwrap();
        let h = h_model(&p, &ops);
        let mut off = 0.0f64;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                if i != j {
                    off = off.max(h[[i, j]].norm());
                }
            }
        }
        assert!(off < 1e-15);
    }

    #[test]
    fn h_model_hermitian_for_parameter_draws() {
        let (_, ops) = build_space(5).unwrap();
        for (omega, eps, g1, g2) in [
            (50.0, 10.0, 1.0, 0.3),
            (5.0, 1.0, 0.7, 1.9),
            (2.0, 8.0, 1.4, 0.0),
        ] {
            let p = ModelParams {
                omega,
                epsilon: eps,
                g1,
                g2,
                omega_d: 0.3,
                drive: 0.2,
                kappa: 0.1,
                gamma: 0.01,
            };
            assert!(herm_deviation(&h_model(&p, &ops)) < 1e-12);
            assert!(herm_deviation(&h_rotating(&p, &ops)) < 1e-12);
        }
    }

    #[test]
    fn effective_block_symmetric_couplings() {
        let eff = EffectiveParams::new(1, 40.0, 1.0, 1.0).unwrap();
        let h = h_effective(&eff);
        assert!(h[[0, 0]].norm() < 1e-15);
        assert!(h[[1, 1]].norm() < 1e-15);
        assert!((h[[0, 1]] - c64(1.0 / 40.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn effective_block_example_numbers() {
        // g1=1, g2=0.6, δ=40, N_ph=1: splitting 3·0.64/80 = 0.024, J = 0.015
        let eff = EffectiveParams::new(1, 40.0, 1.0, 0.6).unwrap();
        let h = h_effective(&eff);
        assert!((h[[0, 0]].re - 0.024).abs() < 1e-15);
        assert!((h[[1, 1]].re + 0.024).abs() < 1e-15);
        assert!((h[[0, 1]].re - 0.015).abs() < 1e-15);
        // Hermitian with real symmetric off-diagonal
        assert!((h[[0, 1]] - h[[1, 0]].conj()).norm() < 1e-15);
        assert!(h[[0, 1]].im.abs() < 1e-15);
        // traceless under the s^z = ±1/2 convention
        assert!(trace(&h).norm() < 1e-15);
    }

    #[test]
    fn effective_params_invariants() {
        let eff = EffectiveParams::new(2, -40.0, 1.0, 0.5).unwrap();
        assert_eq!(eff.c, 5.0);
        assert!((eff.g_t1 / 1.0 - eff.c.sqrt()).abs() < 1e-12);
        assert!((eff.g_t2 / 0.5 - eff.c.sqrt()).abs() < 1e-12);
        assert!((eff.delta_tilde - (-200.0)).abs() < 1e-12);
        assert!(EffectiveParams::new(1, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rotating_frame_reduces_to_model() {
        let mut p = fig4_params();
        p.drive = 0.0;
        p.omega_d = 0.0;
        let (_, ops) = build_space(4).unwrap();
        let hm = h_model(&p, &ops);
        let hr = h_rotating(&p, &ops);
        let diff = (&hm - &hr).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn drive_connects_only_second_qubit_flips() {
        let p = fig4_params();
        let (space, ops) = build_space(3).unwrap();
        let mut drive = h_rotating(&p, &ops);
        // strip everything except the drive
        let mut undriven = p;
        undriven.drive = 0.0;
        drive -= &h_rotating(&undriven, &ops);
        for q1 in 0..2 {
            for n in 0..3 {
                for q2 in 0..2 {
                    for q1b in 0..2 {
                        for nb in 0..3 {
                            for q2b in 0..2 {
                                let el = drive[[space.index(q1, n, q2), space.index(q1b, nb, q2b)]];
                                let flips_q2_only = q1 == q1b && n == nb && q2 != q2b;
                                if flips_q2_only {
                                    assert!((el - c64(p.drive, 0.0)).norm() < 1e-15);
                                } else {
                                    assert!(el.norm() < 1e-15);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fig4b_cavity_detuning() {
        // ω=50, ε=10, ω_d=9.99: the a†a コefficient is 40.01
        let p = fig4_params();
        let (space, ops) = build_space(4).unwrap();
        let h = h_rotating(&p, &ops);
        for n in 1..4 {
            let lo = basis_state(&space, 0, 0, 0).unwrap();
            let hi = basis_state(&space, 0, n, 0).unwrap();
            let e_lo = braket(&lo, &h, &lo).re;
            let e_hi = braket(&hi, &h, &hi).re;
            assert!(((e_hi - e_lo) - 40.01 * n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn liouvillian_annihilates_trace() {
        let p = fig4_params();
        let (space, ops) = build_space(3).unwrap();
        let l = liouvillian(&p, &ops).unwrap();
        for seed in 0..3 {
            let mut rho = random_hermitian(space.dim, 42 + seed);
            let tr = trace(&rho);
            rho.mapv_inplace(|z| z / tr);
            let drho = unvectorize(&matvec(&l, &vectorize(&rho))).unwrap();
            assert!(trace(&drho).norm() < 1e-12);
        }
    }

    #[test]
    fn liouvillian_unitary_limit() {
        let mut p = fig4_params();
        p.kappa = 0.0;
        p.gamma = 0.0;
        p.drive = 0.0;
        let (space, ops) = build_space(3).unwrap();
        let l = liouvillian(&p, &ops).unwrap();
        let h = h_rotating(&p, &ops);
        let rho = {
            let mut r = random_hermitian(space.dim, 7);
            let tr = trace(&r);
            r.mapv_inplace(|z| z / tr);
            r
        };
        let lhs = unvectorize(&matvec(&l, &vectorize(&rho))).unwrap();
        let rhs = (h.dot(&rho) - rho.dot(&h)).mapv(|z| z * c64(0.0, -1.0));
        let diff = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn liouvillian_matches_direct_master_equation() {
        // independent construction: apply the equation-of-motion matrices directly
        let p = fig4_params();
        let (space, ops) = build_space(3).unwrap();
        let l = liouvillian(&p, &ops).unwrap();
        let h = h_rotating(&p, &ops);
        let channels: Vec<(f64, &CMat)> = vec![
            (p.kappa, &ops.a),
            (p.gamma, &ops.sm[0]),
            (p.gamma, &ops.sm[1]),
        ];
        let rho = {
            let mut r = random_hermitian(space.dim, 99);
            let tr = trace(&r);
            r.mapv_inplace(|z| z / tr);
            r
        };
        let mut rhs = (h.dot(&rho) - rho.dot(&h)).mapv(|z| z * c64(0.0, -1.0));
        for (rate, op) in channels {
            let od = dagger(op);
            let odo = od.dot(op);
            let jump = op.dot(&rho).dot(&od);
            let anti = odo.dot(&rho) + rho.dot(&odo);
            rhs += &(jump - anti.mapv(|z| z * c64(0.5, 0.0))).mapv(|z| z * c64(rate, 0.0));
        }
        let lhs = unvectorize(&matvec(&l, &vectorize(&rho))).unwrap();
        let diff = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn liouvillian_preserves_hermiticity() {
        let p = fig4_params();
        let (space, ops) = build_space(3).unwrap();
        let l = liouvillian(&p, &ops).unwrap();
        for seed in 0..3 {
            let rho = random_hermitian(space.dim, 1000 + seed);
            let drho = unvectorize(&matvec(&l, &vectorize(&rho))).unwrap();
            assert!(herm_deviation(&drho) < 1e-12);
        }
    }

    #[test]
    fn pure_cavity_decay_rate() {
        // g = d = γ = 0, κ > 0: d⟨a†a⟩/dt = -κ⟨a†a⟩ directly from L
        let p = ModelParams {
            omega: 2.0,
            epsilon: 1.0,
            g1: f64::MIN_POSITIVE,
            g2: 0.0,
            omega_d: 1.0,
            drive: 0.0,
            kappa: 0.8,
            gamma: 0.0,
        };
        let (space, ops) = build_space(4).unwrap();
        let l = liouvillian(&p, &ops).unwrap();
        // ρ = |0,2,0⟩⟨0,2,0|
        let v = basis_state(&space, 0, 2, 0).unwrap();
        let mut rho = CMat::zeros((space.dim, space.dim));
        for i in 0..space.dim {
            for j in 0..space.dim {
                rho[[i, j]] = v[i] * v[j].conj();
            }
        }
        let drho = unvectorize(&matvec(&l, &vectorize(&rho))).unwrap();
        let dn = trace(&ops.n_phot.dot(&drho)).re;
        assert!((dn + p.kappa * 2.0).abs() < 1e-12);
        let _ = vec_norm(&vectorize(&rho));
    }

    #[test]
    fn validate_rejects_negative_rates() {
        let mut p = fig4_params();
        p.gamma = -0.1;
        assert!(p.validate().is_err());
        let mut p2 = fig4_params();
        p2.g1 = 0.0;
        assert!(p2.validate().is_err());
    }

    #[test]
    fn dispersive_guard() {
        let p = fig4_params(); // |δ| = 40, g̃ = √3
        assert!(p.dispersive_ok(1));
        let mut near = p;
        near.epsilon = 49.0; // |δ| = 1
        assert!(!near.dispersive_ok(1));
    }
}
