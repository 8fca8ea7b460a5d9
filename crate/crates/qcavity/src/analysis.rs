//! Closed-form threshold results, the steady-state sweep engine, and
//! valley/peak feature extraction.

use rayon::prelude::*;

use crate::dynamics::{evolve_closed, steady_state, time_grid};
use crate::error::{Error, Result};
use crate::hilbert::build_space;
use crate::measures::{
    concurrence, cross_correlation, peak_entanglement, qubit_pair_pure, reduce_to_qubits,
};
use crate::model::{h_effective, liouvillian, EffectiveParams, ModelParams};
use crate::numerics::{c64, CVec};
use crate::tolerances as tol;

/// Eigenvalues λ± of the dispersive Hamiltonian, evaluated exactly as the
/// closed form reads:
///
/// ```text
/// λ± = (g̃1²+g̃2²)/δ ± sqrt[ (g̃1²+g̃2²)²/δ² - 4 g̃1²g̃2² (1-1/c²)/δ² ]
/// ```
///
/// The discriminant is non-negative for every real input since 1-1/c² ≤ 1;
/// this is asserted.
pub fn lambda_pm(eff: &EffectiveParams) -> (f64, f64) {
    let s = (eff.g_t1 * eff.g_t1 + eff.g_t2 * eff.g_t2) / eff.delta;
    let prod = eff.g_t1 * eff.g_t1 * eff.g_t2 * eff.g_t2 / (eff.delta * eff.delta);
    let disc = s * s - 4.0 * prod * (1.0 - 1.0 / (eff.c * eff.c));
    assert!(
        disc >= -1e-12 * s.abs().max(1.0),
        "negative discriminant {disc} cannot occur for real couplings"
    );
    let root = disc.max(0.0).sqrt();
    (s + root, s - root)
}

/// The maximal-entanglement condition x + 1/x ≤ 6 with
/// x = (g̃2²/δ - λ₋)² / (g̃1g̃2/(cδ))².
///
/// λ₋ here is the lower eigenvalue of the two-level block whose diagonal is
/// (g̃1²/δ, g̃2²/δ) and off-diagonal g̃1g̃2/(cδ), i.e. half the value printed
/// by [`lambda_pm`]; the doubled eigenvalues are inconsistent with the x
/// denominators and would move the equality away from the threshold ratio.
/// Returns (lhs, satisfied).
pub fn mes_inequality(eff: &EffectiveParams) -> Result<(f64, bool)> {
    if eff.g_t2 == 0.0 {
        return Err(Error::InvalidParams(
            "MES condition undefined at g2 = 0 (zero denominator)".into(),
        ));
    }
    let lam_minus = lambda_pm(eff).1 / 2.0;
    let num = (eff.g_t2 * eff.g_t2 / eff.delta - lam_minus).powi(2);
    let den = (eff.g_t1 * eff.g_t2 / (eff.c * eff.delta)).powi(2);
    let x = num / den;
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::InvalidParams(format!(
            "degenerate eigenvector ratio x = {x}"
        )));
    }
    let lhs = x + 1.0 / x;
    Ok((lhs, lhs <= 6.0))
}

/// Closed-form coupling-ratio threshold for maximal entanglement,
/// (g2/g1)_th = [1/c + sqrt(1 + 1/c²)]⁻¹ = c/(1 + sqrt(1 + c²)), c = 2N_ph+1.
pub fn threshold_analytic(n_ph: usize) -> f64 {
    let c = (2 * n_ph + 1) as f64;
    c / (1.0 + (1.0 + c * c).sqrt())
}

/// Rabi-oscillation peak of the effective two-level dynamics started in
/// |01⟩_q: transfer amplitude p_max = J²/(J²+Δ²) and the resulting peak
/// entanglement (1 when the population crosses 1/2, else 2√(p_max(1-p_max))).
pub fn rabi_peak(eff: &EffectiveParams) -> (f64, f64) {
    let j = eff.exchange_coupling();
    let delta = eff.stark_splitting();
    let p_max = j * j / (j * j + delta * delta);
    let e_p = if p_max >= 0.5 {
        1.0
    } else {
        2.0 * (p_max * (1.0 - p_max)).sqrt()
    };
    (p_max, e_p)
}

/// Detuning used by the numeric threshold scan; thresholds depend on J² and
/// Δ² only, so any dispersive value works (asserted in tests).
const SCAN_DELTA: f64 = 40.0;

/// Peak entanglement of the numerically evolved effective model at coupling
/// ratio `r`, sampled over two full Rabi periods (4π/Ω at 2000 points).
pub fn closed_peak_entanglement(n_ph: usize, ratio: f64) -> Result<f64> {
    let eff = EffectiveParams::new(n_ph, SCAN_DELTA, 1.0, ratio)?;
    let h = h_effective(&eff);
    let j = eff.exchange_coupling();
    let delta = eff.stark_splitting();
    let omega = (j * j + delta * delta).sqrt();
    let times = time_grid(4.0 * std::f64::consts::PI / omega, 2000);
    let psi0 = CVec::from_vec(vec![c64(0.0, 0.0), c64(1.0, 0.0)]);
    let traj = evolve_closed(&h, &psi0, &times[1..])?;
    let es: Vec<f64> = traj
        .states
        .iter()
        .map(|s| concurrence(&qubit_pair_pure(s[0], s[1])))
        .collect::<Result<_>>()?;
    let (e_p, _) = peak_entanglement(&traj.times, &es)?;
    Ok(e_p)
}

/// Smallest coupling ratio whose closed-dynamics peak reaches the numeric
/// maximal-entanglement criterion, found by a grid scan refined by bisection
/// to 1e-4.
pub fn threshold_numeric(n_ph: usize, grid_step: f64) -> Result<f64> {
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::InvalidParams(format!(
            "grid step must be in (0, 0.01], got {grid_step}"
        )));
    }
    let reaches_mes =
        |r: f64| -> Result<bool> { Ok(closed_peak_entanglement(n_ph, r)? >= tol::MES_PEAK_MIN) };
    let mut first_hit = None;
    let mut r = grid_step;
    while r <= 1.0 + 1e-12 {
        if reaches_mes(r)? {
            first_hit = Some(r);
            break;
        }
        r += grid_step;
    }
    let hi = first_hit.ok_or(Error::NoMesFound)?;
    let mut hi = hi;
    let mut lo = (hi - grid_step).max(grid_step * 0.5);
    if lo >= hi {
        return Ok(hi);
    }
    while hi - lo > tol::THRESHOLD_REFINE {
        let mid = 0.5 * (lo + hi);
        if reaches_mes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Drive strength d in units of g1.
    Drive,
    /// Coupling asymmetry g2/g1.
    CouplingRatio,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Drive => "d",
            SweepAxis::CouplingRatio => "ratio",
        }
    }
}

/// One grid point of a steady-state sweep. Failures are recorded as explicit
/// markers, never dropped. `c_ss` is `None` when the cross-correlation was
/// not requested, `Some(Err(..))` when it is undefined at this point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub e_ss: std::result::Result<f64, String>,
    pub c_ss: Option<std::result::Result<f64, String>>,
}

/// A labeled steady-state sweep with its parameter provenance.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub base: ModelParams,
    pub n_cavity: usize,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub n_cavity: usize,
    pub with_cross_correlation: bool,
}

/// Steady-state sweep over one parameter axis. Grid points are independent
/// solves evaluated in parallel; rows are assembled in input order, and
/// per-point failures become error markers rather than aborting the sweep.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &ModelParams,
    opts: &SweepOptions,
) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::InvalidParams("sweep needs a nonempty grid".into()));
    }
    base.validate()?;
    let (space, ops) = build_space(opts.n_cavity)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&value| {
            let mut p = *base;
            match axis {
                SweepAxis::Drive => p.drive = value,
                SweepAxis::CouplingRatio => p.g2 = value * p.g1,
            }
            let outcome = (|| -> Result<(f64, Option<std::result::Result<f64, String>>)> {
                let l = liouvillian(&p, &ops)?;
                let ss = steady_state(&l)?;
                let rq = reduce_to_qubits(&ss.rho, &space)?;
                let e_ss = concurrence(&rq)?;
                let c_ss = if opts.with_cross_correlation {
                    Some(cross_correlation(&ss.rho, &ops).map_err(|e| e.to_string()))
                } else {
                    None
                };
                Ok((e_ss, c_ss))
            })();
            match outcome {
                Ok((e_ss, c_ss)) => SweepRow {
                    value,
                    e_ss: Ok(e_ss),
                    c_ss,
                },
                Err(e) => SweepRow {
                    value,
                    e_ss: Err(e.to_string()),
                    c_ss: None,
                },
            }
        })
        .collect();
    Ok(SweepTable {
        axis,
        base: *base,
        n_cavity: opts.n_cavity,
        rows,
    })
}

/// Valley width and peak location of a coupling-ratio sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSet {
    /// Width (max - min of the axis) of the widest contiguous E_ss ≈ 0
    /// region; 0 when no point falls below the zero tolerance.
    pub g2r: f64,
    /// Axis location of the global E_ss maximum, parabolic-refined.
    pub g2p: f64,
    /// Drive strength the sweep was taken at.
    pub drive: f64,
    /// Set when the maximum sits on the grid boundary (refinement skipped).
    pub peak_at_boundary: bool,
}

/// Extract the E_ss = 0 valley width and the E_ss peak location from a
/// coupling-ratio sweep with at least 50 points.
pub fn extract_features(table: &SweepTable, zero_tol: f64) -> Result<FeatureSet> {
    if table.axis != SweepAxis::CouplingRatio {
        return Err(Error::InvalidParams(
            "feature extraction applies to coupling-ratio sweeps".into(),
        ));
    }
    if table.rows.len() < 50 {
        return Err(Error::InvalidParams(format!(
            "feature extraction needs at least 50 grid points, got {}",
            table.rows.len()
        )));
    }
    if zero_tol <= 0.0 || !zero_tol.is_finite() {
        return Err(Error::InvalidParams(format!(
            "zero tolerance must be positive, got {zero_tol}"
        )));
    }
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.e_ss.as_ref().ok().map(|e| (r.value, *e)))
        .collect();
    if points.is_empty() {
        return Err(Error::InvalidParams(
            "no successful rows in the sweep table".into(),
        ));
    }

    // widest contiguous run of E_ss ≤ zero_tol
    let mut g2r: f64 = 0.0;
    let mut run_start: Option<f64> = None;
    let mut last_in_run = 0.0;
    for &(x, e) in &points {
        if e <= zero_tol {
            if run_start.is_none() {
                run_start = Some(x);
            }
            last_in_run = x;
        } else if let Some(start) = run_start.take() {
            g2r = g2r.max(last_in_run - start);
        }
    }
    if let Some(start) = run_start {
        g2r = g2r.max(last_in_run - start);
    }

    // global maximum with parabolic refinement on interior peaks
    let mut k = 0usize;
    for (i, &(_, e)) in points.iter().enumerate() {
        if e > points[k].1 {
            k = i;
        }
    }
    let peak_at_boundary = k == 0 || k + 1 == points.len();
    let g2p = if peak_at_boundary {
        points[k].0
    } else {
        let (x0, y0) = points[k - 1];
        let (x1, y1) = points[k];
        let (x2, y2) = points[k + 1];
        let d1 = (y1 - y0) / (x1 - x0);
        let d2 = (y2 - y1) / (x2 - x1);
        let curv = 2.0 * (d2 - d1) / (x2 - x0);
        if curv < 0.0 {
            let x_star = 0.5 * (x0 + x1) - d1 / curv;
            if x_star >= x0 && x_star <= x2 {
                x_star
            } else {
                x1
            }
        } else {
            x1
        }
    };

    let grid_max = points.last().map(|(x, _)| *x).unwrap_or(0.0);
    debug_assert!(g2r >= 0.0);
    debug_assert!((0.0..=1.2 * grid_max).contains(&g2p));
    Ok(FeatureSet {
        g2r,
        g2p,
        drive: table.base.drive,
        peak_at_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eff(n_ph: usize, delta: f64, g1: f64, g2: f64) -> EffectiveParams {
        EffectiveParams::new(n_ph, delta, g1, g2).unwrap()
    }

    #[test]
    fn lambda_pm_symmetric_example() {
        // g1 = g2 = 1, δ = 1, N_ph = 1: λ± = 6 ± 2
        let (lp, lm) = lambda_pm(&eff(1, 1.0, 1.0, 1.0));
        assert!((lp - 8.0).abs() < 1e-12);
        assert!((lm - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_pm_decoupled_pair() {
        // g2 = 0: λ± = g̃1²/δ ± g̃1²/δ = {2g̃1²/δ, 0}
        let e = eff(1, 2.0, 1.0, 0.0);
        let (lp, lm) = lambda_pm(&e);
        assert!((lp - 2.0 * e.g_t1 * e.g_t1 / e.delta).abs() < 1e-12);
        assert!(lm.abs() < 1e-12);
    }

    #[test]
    fn lambda_pm_large_c_limit() {
        // c → ∞: λ₋ → [(g̃1²+g̃2²) - |g̃1²-g̃2²|]/δ
        let n_ph = 500_000; // c = 1_000_001
        let e = eff(n_ph, 1.0e6, 1.0, 0.6);
        let (_, lm) = lambda_pm(&e);
        let s = (e.g_t1 * e.g_t1 + e.g_t2 * e.g_t2) / e.delta;
        let diff = (e.g_t1 * e.g_t1 - e.g_t2 * e.g_t2).abs() / e.delta;
        let limit = s - diff;
        assert!((lm - limit).abs() / limit.abs().max(1.0) < 1e-6);
    }

    #[test]
    fn lambda_pm_matches_two_level_eigensolver() {
        // the closed form equals the spectrum of the doubled dispersive
        // block [[2g̃1²/δ, 2g̃1g̃2/(cδ)], [·, 2g̃2²/δ]]
        use crate::numerics::{c64, eig_herm, CMat};
        for (n_ph, delta, g2) in [(0usize, 7.0, 0.5), (1, 40.0, 0.6), (2, -25.0, 1.3)] {
            let e = eff(n_ph, delta, 1.0, g2);
            let mut block = CMat::zeros((2, 2));
            block[[0, 0]] = c64(2.0 * e.g_t1 * e.g_t1 / e.delta, 0.0);
            block[[1, 1]] = c64(2.0 * e.g_t2 * e.g_t2 / e.delta, 0.0);
            let off = 2.0 * e.g_t1 * e.g_t2 / (e.c * e.delta);
            block[[0, 1]] = c64(off, 0.0);
            block[[1, 0]] = c64(off, 0.0);
            let (vals, _) = eig_herm(&block).unwrap();
            let (lp, lm) = lambda_pm(&e);
            let (expect_lo, expect_hi) = if lp >= lm { (lm, lp) } else { (lp, lm) };
            assert!((vals[0] - expect_lo).abs() < 1e-9, "N_ph={n_ph}");
            assert!((vals[1] - expect_hi).abs() < 1e-9, "N_ph={n_ph}");
        }
    }

    #[test]
    fn mes_inequality_boundary_hits_six() {
        for n_ph in [0usize, 1, 2, 3] {
            let r_th = threshold_analytic(n_ph);
            let (lhs, _) = mes_inequality(&eff(n_ph, 40.0, 1.0, r_th)).unwrap();
            assert!((lhs - 6.0).abs() < 1e-6, "N_ph={n_ph}: lhs={lhs}");
        }
    }

    #[test]
    fn mes_inequality_symmetric_satisfied() {
        let (lhs, ok) = mes_inequality(&eff(1, -40.0, 1.0, 1.0)).unwrap();
        assert!(ok, "lhs = {lhs}");
    }

    #[test]
    fn mes_inequality_below_threshold_fails() {
        // g2/g1 = 0.5 with N_ph = 1 sits below the 0.7208 threshold
        let (lhs, ok) = mes_inequality(&eff(1, 40.0, 1.0, 0.5)).unwrap();
        assert!(!ok);
        assert!(lhs > 6.0);
    }

    #[test]
    fn mes_inequality_zero_coupling_errors() {
        assert!(mes_inequality(&eff(1, 40.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn threshold_analytic_values() {
        assert!((threshold_analytic(0) - 0.414214).abs() < 1e-6);
        assert!((threshold_analytic(1) - 0.720759).abs() < 1e-6);
        assert!((threshold_analytic(2) - 0.819804).abs() < 1e-6);
        assert!((threshold_analytic(3) - 0.867295).abs() < 1e-6);
        assert!((threshold_analytic(20) - 0.975907).abs() < 1e-6);
    }

    #[test]
    fn threshold_analytic_monotone_to_unity() {
        let mut prev = 0.0;
        for n_ph in 0..200 {
            let th = threshold_analytic(n_ph);
            assert!(th > prev);
            prev = th;
        }
        assert!(threshold_analytic(1000) >= 0.9995);
    }

    #[test]
    fn rabi_peak_examples() {
        let (p, e) = rabi_peak(&eff(1, 40.0, 1.0, 1.0));
        assert!((p - 1.0).abs() < 1e-12);
        assert!((e - 1.0).abs() < 1e-12);

        let (p, e) = rabi_peak(&eff(1, 40.0, 1.0, 0.6));
        assert!((p - 0.280899).abs() < 1e-5);
        assert!((e - 0.898877).abs() < 1e-5);

        // exactly at the threshold p_max = 1/2
        let (p, e) = rabi_peak(&eff(2, 40.0, 1.0, threshold_analytic(2)));
        assert!((p - 0.5).abs() < 1e-9);
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rabi_peak_n0_asymmetric_still_maximal() {
        // g2/g1 = 0.6 at N_ph = 0: p_max = 0.7785 crosses 1/2
        let (p, e) = rabi_peak(&eff(0, 40.0, 1.0, 0.6));
        assert!((p - 0.778547).abs() < 1e-5);
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rabi_and_inequality_verdicts_agree() {
        for n_ph in [0usize, 1, 2, 4] {
            for k in 1..40 {
                let r = k as f64 * 0.025;
                let e = eff(n_ph, -40.0, 1.0, r);
                let (lhs, ok_ineq) = mes_inequality(&e).unwrap();
                if (lhs - 6.0).abs() <= 1e-9 {
                    continue; // boundary band excluded
                }
                let (p_max, _) = rabi_peak(&e);
                assert_eq!(ok_ineq, p_max >= 0.5, "N_ph={n_ph}, r={r}");
            }
        }
    }

    #[test]
    fn closed_peak_matches_rabi_closed_form() {
        for (n_ph, r) in [(0usize, 0.3), (1, 0.6), (1, 0.9), (2, 0.5)] {
            let e_num = closed_peak_entanglement(n_ph, r).unwrap();
            let (_, e_ref) = rabi_peak(&eff(n_ph, SCAN_DELTA, 1.0, r));
            assert!(
                (e_num - e_ref).abs() < 1e-6,
                "N_ph={n_ph}, r={r}: {e_num} vs {e_ref}"
            );
        }
    }

    #[test]
    fn threshold_numeric_tracks_analytic() {
        for n_ph in [0usize, 1] {
            let num = threshold_numeric(n_ph, 0.01).unwrap();
            let ana = threshold_analytic(n_ph);
            assert!((num - ana).abs() <= 0.01, "N_ph={n_ph}: {num} vs {ana}");
        }
    }

    #[test]
    fn threshold_numeric_rejects_coarse_grid() {
        assert!(threshold_numeric(0, 0.05).is_err());
    }

    #[test]
    fn extract_features_synthetic_valley() {
        let values: Vec<f64> = (0..96).map(|i| 0.05 + i as f64 * 0.01).collect();
        let rows: Vec<SweepRow> = values
            .iter()
            .map(|&v| {
                // hump at 0.2, zero valley on [0.35, 0.6], rise toward 1.0
                let e = if v < 0.35 {
                    0.2 * (-((v - 0.2) / 0.07).powi(2)).exp()
                } else if v <= 0.6 {
                    0.0
                } else {
                    0.9 * (v - 0.6)
                };
                SweepRow {
                    value: v,
                    e_ss: Ok(e),
                    c_ss: None,
                }
            })
            .collect();
        let table = SweepTable {
            axis: SweepAxis::CouplingRatio,
            base: dummy_params(0.016),
            n_cavity: 6,
            rows,
        };
        let f = extract_features(&table, 1e-4).unwrap();
        assert!(f.g2r > 0.15 && f.g2r < 0.35, "g2r = {}", f.g2r);
        assert!(f.peak_at_boundary); // rise keeps growing to the right edge
        assert!((f.g2p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn extract_features_no_valley() {
        let values: Vec<f64> = (0..60).map(|i| 0.05 + i as f64 * 0.01).collect();
        let rows: Vec<SweepRow> = values
            .iter()
            .map(|&v| SweepRow {
                value: v,
                e_ss: Ok(0.3 * (-((v - 0.4) / 0.2).powi(2)).exp() + 0.01),
                c_ss: None,
            })
            .collect();
        let table = SweepTable {
            axis: SweepAxis::CouplingRatio,
            base: dummy_params(0.006),
            n_cavity: 6,
            rows,
        };
        let f = extract_features(&table, 1e-4).unwrap();
        assert_eq!(f.g2r, 0.0);
        assert!(!f.peak_at_boundary);
        assert!((f.g2p - 0.4).abs() < 5e-3);
    }

    #[test]
    fn extract_features_requires_dense_grid() {
        let rows: Vec<SweepRow> = (0..10)
            .map(|i| SweepRow {
                value: i as f64,
                e_ss: Ok(0.0),
                c_ss: None,
            })
            .collect();
        let table = SweepTable {
            axis: SweepAxis::CouplingRatio,
            base: dummy_params(0.01),
            n_cavity: 6,
            rows,
        };
        assert!(extract_features(&table, 1e-4).is_err());
    }

    fn dummy_params(drive: f64) -> ModelParams {
        ModelParams {
            omega: 50.0,
            epsilon: 10.0,
            g1: 1.0,
            g2: 1.0,
            omega_d: 9.99,
            drive,
            kappa: 1.0,
            gamma: 0.005,
        }
    }
}
