//! CSV-producing command implementations behind the `qcavity` binary.
//!
//! All commands are deterministic: identical config plus command yields
//! byte-identical output. Numbers print with 12 significant digits in
//! locale-independent scientific notation; comment lines prefixed `#` carry
//! the resolved parameter set.

use std::fmt::Write as _;

use crate::analysis::{
    extract_features, sweep, threshold_analytic, threshold_numeric, SweepAxis, SweepOptions,
};
use crate::config::RunConfig;
use crate::dynamics::{default_step, evolve_closed, evolve_open, steady_state, time_grid};
use crate::error::{Error, Result};
use crate::hilbert::{basis_state, build_space};
use crate::measures::{
    concurrence, cross_correlation, qubit_pair_pure, record_from_density, reduce_to_qubits,
};
use crate::model::{h_effective, h_rotating, liouvillian, EffectiveParams};
use crate::numerics::{c64, line_fit, CMat, CVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliCommand {
    Threshold,
    Closed,
    Open,
    Steady,
    SweepDrive,
    SweepRatio,
    Features,
}

impl CliCommand {
    pub fn name(&self) -> &'static str {
        match self {
            CliCommand::Threshold => "threshold",
            CliCommand::Closed => "closed",
            CliCommand::Open => "open",
            CliCommand::Steady => "steady",
            CliCommand::SweepDrive => "sweep-drive",
            CliCommand::SweepRatio => "sweep-ratio",
            CliCommand::Features => "features",
        }
    }
}

impl std::str::FromStr for CliCommand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(CliCommand::Threshold),
            "closed" => Ok(CliCommand::Closed),
            "open" => Ok(CliCommand::Open),
            "steady" => Ok(CliCommand::Steady),
            "sweep-drive" => Ok(CliCommand::SweepDrive),
            "sweep-ratio" => Ok(CliCommand::SweepRatio),
            "features" => Ok(CliCommand::Features),
            other => Err(Error::InvalidParams(format!("unknown command `{other}`"))),
        }
    }
}

/// 12 significant digits, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| if c == ',' || c == '\n' { ';' } else { c })
        .collect()
}

fn e_cell(v: &std::result::Result<f64, String>) -> String {
    match v {
        Ok(x) => fmt_sig(*x),
        Err(msg) => format!("ERROR({})", sanitize(msg)),
    }
}

fn c_cell(v: &Option<std::result::Result<f64, String>>) -> String {
    match v {
        Some(Ok(x)) => fmt_sig(*x),
        Some(Err(_)) => "NA".to_string(),
        None => "NA".to_string(),
    }
}

struct Csv {
    buf: String,
}

impl Csv {
    fn new(cmd: CliCommand, cfg: &RunConfig) -> Self {
        let mut buf = String::new();
        let p = &cfg.params;
        let _ = writeln!(buf, "# qcavity {}", cmd.name());
        for (k, v) in [
            ("omega", p.omega),
            ("epsilon", p.epsilon),
            ("g1", p.g1),
            ("g2", p.g2),
            ("omega_d", p.omega_d),
            ("d", p.drive),
            ("kappa", p.kappa),
            ("gamma", p.gamma),
        ] {
            let _ = writeln!(buf, "# {k} = {}", fmt_sig(v));
        }
        let _ = writeln!(buf, "# nph = {}", cfg.n_ph);
        let _ = writeln!(buf, "# ncav = {}", cfg.n_cavity);
        if !p.dispersive_ok(cfg.n_ph) {
            let _ = writeln!(
                buf,
                "# warning: dispersive guard violated, |delta| < 10*max(g~1, g~2)"
            );
        }
        Csv { buf }
    }

    fn comment(&mut self, text: &str) {
        let _ = writeln!(self.buf, "# {text}");
    }

    fn line(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    fn finish(self) -> String {
        self.buf
    }
}

/// Run one CLI command against a resolved configuration, producing the CSV
/// document. Numerical failures propagate as errors except inside sweeps,
/// where they become per-row markers.
pub fn run_command(cmd: CliCommand, cfg: &RunConfig) -> Result<String> {
    cfg.params.validate()?;
    match cmd {
        CliCommand::Threshold => cmd_threshold(cfg),
        CliCommand::Closed => cmd_closed(cfg),
        CliCommand::Open => cmd_open(cfg),
        CliCommand::Steady => cmd_steady(cfg),
        CliCommand::SweepDrive => cmd_sweep_drive(cfg),
        CliCommand::SweepRatio => cmd_sweep_ratio(cfg),
        CliCommand::Features => cmd_features(cfg),
    }
}

fn cmd_threshold(cfg: &RunConfig) -> Result<String> {
    let mut csv = Csv::new(CliCommand::Threshold, cfg);
    csv.comment(&format!("nph_max = {}", cfg.nph_max));
    csv.comment(&format!("grid_step = {}", fmt_sig(cfg.grid_step)));
    csv.line(&[
        "nph".into(),
        "c".into(),
        "th_analytic".into(),
        "th_numeric".into(),
    ]);
    for n_ph in 0..=cfg.nph_max {
        let th_a = threshold_analytic(n_ph);
        let th_n = threshold_numeric(n_ph, cfg.grid_step)?;
        csv.line(&[
            n_ph.to_string(),
            (2 * n_ph + 1).to_string(),
            fmt_sig(th_a),
            fmt_sig(th_n),
        ]);
    }
    Ok(csv.finish())
}

fn cmd_closed(cfg: &RunConfig) -> Result<String> {
    let eff = EffectiveParams::from_params(&cfg.params, cfg.n_ph)?;
    let h = h_effective(&eff);
    let j = eff.exchange_coupling();
    let delta_split = eff.stark_splitting();
    let omega_rabi = (j * j + delta_split * delta_split).sqrt();
    let t_max = if cfg.t_max > 0.0 {
        cfg.t_max
    } else {
        4.0 * std::f64::consts::PI / omega_rabi
    };
    let mut csv = Csv::new(CliCommand::Closed, cfg);
    csv.comment(&format!("t_max = {}", fmt_sig(t_max)));
    csv.comment(&format!("n_steps = {}", cfg.n_steps));
    let times = time_grid(t_max, cfg.n_steps);
    let psi0 = CVec::from_vec(vec![c64(0.0, 0.0), c64(1.0, 0.0)]);
    let traj = evolve_closed(&h, &psi0, &times[1..])?;
    csv.line(&["t".into(), "E".into(), "p10".into(), "p01".into()]);
    // t = 0 row: exact initial state
    csv.line(&[fmt_sig(0.0), fmt_sig(0.0), fmt_sig(0.0), fmt_sig(1.0)]);
    for (t, s) in traj.times.iter().zip(traj.states.iter()) {
        let e = concurrence(&qubit_pair_pure(s[0], s[1]))?;
        csv.line(&[
            fmt_sig(*t),
            fmt_sig(e),
            fmt_sig(s[0].norm_sqr()),
            fmt_sig(s[1].norm_sqr()),
        ]);
    }
    Ok(csv.finish())
}

fn cmd_open(cfg: &RunConfig) -> Result<String> {
    let (space, ops) = build_space(cfg.n_cavity)?;
    if space.n_cavity < cfg.n_ph + 3 {
        return Err(Error::InvalidParams(format!(
            "cavity truncation {} lacks headroom for N_ph = {}",
            space.n_cavity, cfg.n_ph
        )));
    }
    let t_max = if cfg.t_max > 0.0 { cfg.t_max } else { 50.0 };
    let mut csv = Csv::new(CliCommand::Open, cfg);
    csv.comment(&format!("t_max = {}", fmt_sig(t_max)));
    csv.comment(&format!("n_steps = {}", cfg.n_steps));
    let h = h_rotating(&cfg.params, &ops);
    let l = liouvillian(&cfg.params, &ops)?;
    let psi0 = basis_state(&space, 0, cfg.n_ph, 1)?;
    let rho0 = pure_projector(&psi0);
    let times = time_grid(t_max, cfg.n_steps);
    let mut step = default_step(&h, &cfg.params);
    // halve on trace-drift rejection
    let mut traj = None;
    for _ in 0..7 {
        match evolve_open(&l, &rho0, &times[1..], step) {
            Err(Error::TraceDrift { .. }) => step *= 0.5,
            other => {
                traj = Some(other?);
                break;
            }
        }
    }
    let traj = traj.ok_or(Error::TraceDrift {
        drift: f64::NAN,
        bound: crate::tolerances::TRACE_DRIFT,
    })?;
    csv.comment(&format!("step = {}", fmt_sig(step)));
    csv.line(&[
        "t".into(),
        "sz1".into(),
        "sz2".into(),
        "nphot".into(),
        "E".into(),
    ]);
    let rec0 = record_from_density(0.0, &rho0, &ops, &space)?;
    csv.line(&[
        fmt_sig(0.0),
        fmt_sig(rec0.sz1),
        fmt_sig(rec0.sz2),
        fmt_sig(rec0.nphot),
        fmt_sig(rec0.e),
    ]);
    for (t, rho) in traj.times.iter().zip(traj.states.iter()) {
        let rec = record_from_density(*t, rho, &ops, &space)?;
        csv.line(&[
            fmt_sig(*t),
            fmt_sig(rec.sz1),
            fmt_sig(rec.sz2),
            fmt_sig(rec.nphot),
            fmt_sig(rec.e),
        ]);
    }
    Ok(csv.finish())
}

fn pure_projector(psi: &CVec) -> CMat {
    let n = psi.len();
    let mut rho = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            rho[[i, j]] = psi[i] * psi[j].conj();
        }
    }
    rho
}

fn cmd_steady(cfg: &RunConfig) -> Result<String> {
    let (space, ops) = build_space(cfg.n_cavity)?;
    let l = liouvillian(&cfg.params, &ops)?;
    let ss = steady_state(&l)?;
    let rq = reduce_to_qubits(&ss.rho, &space)?;
    let e_ss = concurrence(&rq)?;
    let c_ss = match cross_correlation(&ss.rho, &ops) {
        Ok(v) => fmt_sig(v),
        Err(Error::UndefinedCorrelation(_)) => "NA".to_string(),
        Err(other) => return Err(other),
    };
    let mut csv = Csv::new(CliCommand::Steady, cfg);
    csv.line(&["E_ss".into(), "C_ss".into(), "residual".into()]);
    csv.line(&[fmt_sig(e_ss), c_ss, fmt_sig(ss.residual)]);
    Ok(csv.finish())
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let dx = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + k as f64 * dx).collect()
}

fn sweep_grid(
    cfg: &RunConfig,
    default_lo: f64,
    default_hi: f64,
    default_n: usize,
) -> (Vec<f64>, f64, f64, usize) {
    let lo = cfg.sweep_min.unwrap_or(default_lo);
    let hi = cfg.sweep_max.unwrap_or(default_hi);
    let n = cfg.sweep_steps.unwrap_or(default_n);
    (grid(lo, hi, n), lo, hi, n)
}

fn cmd_sweep_drive(cfg: &RunConfig) -> Result<String> {
    let (values, lo, hi, n) = sweep_grid(cfg, 0.002, 0.1, 50);
    let mut csv = Csv::new(CliCommand::SweepDrive, cfg);
    csv.comment(&format!(
        "sweep d over [{}, {}] with {} points",
        fmt_sig(lo),
        fmt_sig(hi),
        n
    ));
    let table = sweep(
        SweepAxis::Drive,
        &values,
        &cfg.params,
        &SweepOptions {
            n_cavity: cfg.n_cavity,
            with_cross_correlation: false,
        },
    )?;
    csv.line(&["d".into(), "E_ss".into()]);
    for row in &table.rows {
        csv.line(&[fmt_sig(row.value), e_cell(&row.e_ss)]);
    }
    Ok(csv.finish())
}

fn cmd_sweep_ratio(cfg: &RunConfig) -> Result<String> {
    let (values, lo, hi, n) = sweep_grid(cfg, cfg.ratio_min, cfg.ratio_max, cfg.ratio_steps);
    let mut csv = Csv::new(CliCommand::SweepRatio, cfg);
    csv.comment(&format!(
        "sweep g2/g1 over [{}, {}] with {} points",
        fmt_sig(lo),
        fmt_sig(hi),
        n
    ));
    let table = sweep(
        SweepAxis::CouplingRatio,
        &values,
        &cfg.params,
        &SweepOptions {
            n_cavity: cfg.n_cavity,
            with_cross_correlation: true,
        },
    )?;
    csv.line(&["ratio".into(), "E_ss".into(), "C_ss".into()]);
    for row in &table.rows {
        csv.line(&[fmt_sig(row.value), e_cell(&row.e_ss), c_cell(&row.c_ss)]);
    }
    Ok(csv.finish())
}

/// One coupling-ratio sweep per drive value, reduced to (g2r, g2p) features,
/// plus a straight-line fit of g2r(d) over the configured window.
fn cmd_features(cfg: &RunConfig) -> Result<String> {
    let (d_values, lo, hi, n) = sweep_grid(cfg, 0.012, 0.06, 13);
    let ratio_values = grid(cfg.ratio_min, cfg.ratio_max, cfg.ratio_steps);
    let mut csv = Csv::new(CliCommand::Features, cfg);
    csv.comment(&format!(
        "drive grid [{}, {}] with {} points; ratio grid [{}, {}] with {} points",
        fmt_sig(lo),
        fmt_sig(hi),
        n,
        fmt_sig(cfg.ratio_min),
        fmt_sig(cfg.ratio_max),
        cfg.ratio_steps
    ));
    csv.comment(&format!("zero_tol = {}", fmt_sig(cfg.zero_tol)));
    let mut rows = Vec::new();
    let mut boundary_warnings = Vec::new();
    for &d in &d_values {
        let mut p = cfg.params;
        p.drive = d;
        let table = sweep(
            SweepAxis::CouplingRatio,
            &ratio_values,
            &p,
            &SweepOptions {
                n_cavity: cfg.n_cavity,
                with_cross_correlation: false,
            },
        )?;
        let f = extract_features(&table, cfg.zero_tol)?;
        if f.peak_at_boundary {
            boundary_warnings.push(d);
        }
        rows.push((d, f));
    }
    csv.line(&["d".into(), "g2r".into(), "g2p".into()]);
    for (d, f) in &rows {
        csv.line(&[fmt_sig(*d), fmt_sig(f.g2r), fmt_sig(f.g2p)]);
    }
    for d in &boundary_warnings {
        csv.comment(&format!(
            "warning: g2p at grid boundary for d = {}",
            fmt_sig(*d)
        ));
    }
    let fit_lo = cfg.fit_min.unwrap_or(lo);
    let fit_hi = cfg.fit_max.unwrap_or(hi);
    let window: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(d, _)| *d >= fit_lo && *d <= fit_hi)
        .map(|(d, f)| (*d, f.g2r))
        .collect();
    let xs: Vec<f64> = window.iter().map(|(d, _)| *d).collect();
    let ys: Vec<f64> = window.iter().map(|(_, v)| *v).collect();
    match line_fit(&xs, &ys) {
        Ok(fit) => csv.comment(&format!(
            "fit g2r(d) over [{}, {}]: slope = {}, intercept = {}, rms = {}",
            fmt_sig(fit_lo),
            fmt_sig(fit_hi),
            fmt_sig(fit.slope),
            fmt_sig(fit.intercept),
            fmt_sig(fit.rms_residual)
        )),
        Err(e) => csv.comment(&format!("fit g2r(d) unavailable: {e}")),
    }
    Ok(csv.finish())
}
