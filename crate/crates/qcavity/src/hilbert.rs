//! Tripartite basis |q1, n, q2⟩ and embedded qubit/cavity operators.
//!
//! Tensor ordering is qubit-1 ⊗ cavity ⊗ qubit-2, with the flat index
//! `q1·(2·N_c) + n·2 + q2`. Within a qubit factor, index 0 is the ground
//! state and index 1 the excited state, so q = 1 carries s^z = +1/2 and
//! s^- maps excited to ground. The cavity holds Fock levels 0..N_c-1.

use crate::error::{Error, Result};
use crate::numerics::{c64, identity, kron, CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    /// Number of retained Fock levels {0..N_c-1}.
    pub n_cavity: usize,
    /// Total dimension 2·N_c·2.
    pub dim: usize,
}

impl HilbertSpace {
    pub fn new(n_cavity: usize) -> Result<Self> {
        if n_cavity < 2 {
            return Err(Error::InvalidParams(format!(
                "cavity truncation must keep at least 2 Fock levels, got {n_cavity}"
            )));
        }
        Ok(Self {
            n_cavity,
            dim: 4 * n_cavity,
        })
    }

    /// Flat index of |q1, n, q2⟩.
    pub fn index(&self, q1: usize, n: usize, q2: usize) -> usize {
        q1 * (2 * self.n_cavity) + 2 * n + q2
    }
}

/// Operators embedded in the full tripartite space, all dim×dim and immutable
/// after construction.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub identity: CMat,
    /// Cavity annihilation operator, a|n⟩ = √n |n-1⟩ truncated at N_c-1.
    pub a: CMat,
    pub a_dag: CMat,
    /// Photon number a†a.
    pub n_phot: CMat,
    /// Qubit lowering operators s_i^-, i ∈ {0, 1} for qubits 1 and 2.
    pub sm: [CMat; 2],
    pub sp: [CMat; 2],
    /// s_i^z with eigenvalues ±1/2 (excited ↦ +1/2).
    pub sz: [CMat; 2],
}

/// Build the tripartite space and its embedded operator set.
pub fn build_space(n_cavity: usize) -> Result<(HilbertSpace, OperatorSet)> {
    let space = HilbertSpace::new(n_cavity)?;

    let id2 = identity(2);
    let idc = identity(n_cavity);

    // qubit factor, basis (ground, excited)
    let mut lower = CMat::zeros((2, 2));
    lower[[0, 1]] = c64(1.0, 0.0);
    let raise = crate::numerics::dagger(&lower);
    let mut zhalf = CMat::zeros((2, 2));
    zhalf[[0, 0]] = c64(-0.5, 0.0);
    zhalf[[1, 1]] = c64(0.5, 0.0);

    // truncated cavity ladder
    let mut ladder = CMat::zeros((n_cavity, n_cavity));
    for n in 1..n_cavity {
        ladder[[n - 1, n]] = c64((n as f64).sqrt(), 0.0);
    }

    let embed_q1 = |op: &CMat| -> Result<CMat> { kron(&kron(op, &idc)?, &id2) };
    let embed_cav = |op: &CMat| -> Result<CMat> { kron(&kron(&id2, op)?, &id2) };
    let embed_q2 = |op: &CMat| -> Result<CMat> { kron(&kron(&id2, &idc)?, op) };

    let a = embed_cav(&ladder)?;
    let a_dag = crate::numerics::dagger(&a);
    let n_phot = a_dag.dot(&a);

    let ops = OperatorSet {
        identity: identity(space.dim),
        a,
        a_dag,
        n_phot,
        sm: [embed_q1(&lower)?, embed_q2(&lower)?],
        sp: [embed_q1(&raise)?, embed_q2(&raise)?],
        sz: [embed_q1(&zhalf)?, embed_q2(&zhalf)?],
    };
    Ok((space, ops))
}

/// Unit basis vector |q1, n, q2⟩; q = 1 means excited.
pub fn basis_state(space: &HilbertSpace, q1: usize, n: usize, q2: usize) -> Result<CVec> {
    if q1 > 1 || q2 > 1 {
        return Err(Error::InvalidParams(format!(
            "qubit labels must be 0 or 1, got ({q1}, {q2})"
        )));
    }
    if n >= space.n_cavity {
        return Err(Error::FockOutOfRange {
            n,
            n_cavity: space.n_cavity,
        });
    }
    let mut v = CVec::zeros(space.dim);
    v[space.index(q1, n, q2)] = c64(1.0, 0.0);
    Ok(v)
}
