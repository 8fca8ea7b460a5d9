//! Global tolerance table.
//!
//! Every numerical threshold used by the library lives here so that ports and
//! reviews have a single place to look. All values are absolute unless the
//! name says otherwise; matrices are dimensionless (rates in units of g1).

/// Max |M - M†| for a matrix to count as Hermitian.
pub const HERMITICITY: f64 = 1e-10;

/// Max |U U† - I| entry for a propagator to count as unitary.
pub const UNITARITY: f64 = 1e-10;

/// Eigenpair residual |M v - λ v| for the Hermitian eigensolver.
pub const EIG_RESIDUAL: f64 = 1e-9;

/// Eigenvector orthonormality defect for the Hermitian eigensolver.
pub const EIG_ORTHO: f64 = 1e-9;

/// Rank decision: σ_min ≤ NULL_RANK_REL · ‖M‖_F marks a null direction.
pub const NULL_RANK_REL: f64 = 1e-8;

/// Null-vector residual bound: ‖M v‖ ≤ NULL_RESIDUAL_REL · ‖M‖_F.
pub const NULL_RESIDUAL_REL: f64 = 1e-10;

/// Absolute residual bound ‖L·vec(ρ_ss)‖ for trace-normalized steady states.
pub const STEADY_RESIDUAL_ABS: f64 = 1e-10;

/// Hermiticity defect allowed in a density matrix.
pub const DENSITY_HERMITICITY: f64 = 1e-9;

/// |tr ρ - 1| allowed in a density matrix.
pub const DENSITY_TRACE: f64 = 1e-9;

/// Most negative eigenvalue a density matrix may carry; anything below is a
/// hard error surfacing integrator or truncation bugs (never clipped).
pub const DENSITY_MIN_EIG: f64 = -1e-8;

/// Norm drift allowed over a closed-system evolution.
pub const CLOSED_NORM_DRIFT: f64 = 1e-9;

/// Trace drift allowed over an open-system integration.
pub const TRACE_DRIFT: f64 = 1e-8;

/// Imaginary part allowed in tr(ρ·op) for Hermitian op before erroring.
pub const EXPECTATION_IMAG: f64 = 1e-10;

/// Denominator underflow guard in the cross-correlation ratio.
pub const CORRELATION_DENOM: f64 = 1e-12;

/// Numeric stand-in for "peak entanglement reached 1": finite time grids
/// never hit the peak exactly. Set two decades under 1 so the numeric
/// threshold lands within ±0.01 of the closed form (the E_p ≥ 0.999 variant
/// sits 0.010–0.013 below it, outside that window).
pub const MES_PEAK_MIN: f64 = 0.9999;

/// Bisection width for the numeric coupling-ratio threshold.
pub const THRESHOLD_REFINE: f64 = 1e-4;

/// Default E_ss ≈ 0 decision level for valley detection. Concurrence zeros
/// are exact thanks to the max(0,·), but steady-state solves carry ~1e-10
/// residuals amplified by the eigenvalue subtraction in the concurrence.
pub const ZERO_TOL_DEFAULT: f64 = 1e-4;

/// |ΔE_ss| between cavity truncations N_c and N_c+2 that counts as converged.
pub const TRUNCATION_DELTA: f64 = 1e-6;

/// Dispersive-regime guard: warn when |δ| < 10 · max(g̃1, g̃2).
pub const DISPERSIVE_FACTOR: f64 = 10.0;
