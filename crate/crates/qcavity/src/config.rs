//! Run configuration: `key = value` documents plus `--set` overrides.
//!
//! Unknown keys are rejected; missing keys take the documented defaults
//! (ω=50, ε=10, ω_d=9.99, κ=1, γ=0.005, g1=1, g2=1, d=0, N_ph=1, N_c=6, all
//! rates in units of g1). Every violation reports the offending location.

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    /// Initial cavity photon number N_ph.
    pub n_ph: usize,
    /// Fock truncation N_c (needs N_c ≥ N_ph + 3 headroom).
    pub n_cavity: usize,
    /// Trajectory horizon; 0 selects a per-command automatic value.
    pub t_max: f64,
    /// Output grid size for trajectory commands.
    pub n_steps: usize,
    /// Sweep axis grid; per-command defaults apply when unset.
    pub sweep_min: Option<f64>,
    pub sweep_max: Option<f64>,
    pub sweep_steps: Option<usize>,
    /// Inner coupling-ratio grid used by the features command.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_steps: usize,
    /// Drive window for the straight-line feature fits; defaults to the
    /// whole sweep grid.
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,
    /// E_ss ≈ 0 decision level for valley detection.
    pub zero_tol: f64,
    /// Largest photon number for the threshold command.
    pub nph_max: usize,
    /// Scan step of the numeric threshold search.
    pub grid_step: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams {
                omega: 50.0,
                epsilon: 10.0,
                g1: 1.0,
                g2: 1.0,
                omega_d: 9.99,
                drive: 0.0,
                kappa: 1.0,
                gamma: 0.005,
            },
            n_ph: 1,
            n_cavity: 6,
            t_max: 0.0,
            n_steps: 2000,
            sweep_min: None,
            sweep_max: None,
            sweep_steps: None,
            ratio_min: 0.05,
            ratio_max: 1.0,
            ratio_steps: 96,
            fit_min: None,
            fit_max: None,
            zero_tol: crate::tolerances::ZERO_TOL_DEFAULT,
            nph_max: 3,
            grid_step: 0.01,
        }
    }
}

fn config_err(location: &str, message: impl Into<String>) -> Error {
    Error::Config {
        location: location.to_string(),
        message: message.into(),
    }
}

fn parse_f64(location: &str, key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| {
            config_err(
                location,
                format!("cannot parse `{raw}` as a number for `{key}`"),
            )
        })
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(config_err(
                    location,
                    format!("`{key}` must be finite, got {raw}"),
                ))
            }
        })
}

fn parse_usize(location: &str, key: &str, raw: &str) -> Result<usize> {
    raw.parse::<usize>().map_err(|_| {
        config_err(
            location,
            format!("cannot parse `{raw}` as a count for `{key}`"),
        )
    })
}

/// Assign one key; `location` names the source line or `--set` item for
/// error messages.
pub fn set_key(cfg: &mut RunConfig, key: &str, raw: &str, location: &str) -> Result<()> {
    let nonneg = |v: f64| -> Result<f64> {
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(config_err(
                location,
                format!("`{key}` must be >= 0, got {v}"),
            ))
        }
    };
    match key {
        "omega" => cfg.params.omega = parse_f64(location, key, raw)?,
        "epsilon" => cfg.params.epsilon = parse_f64(location, key, raw)?,
        "omega_d" => cfg.params.omega_d = parse_f64(location, key, raw)?,
        "g1" => {
            let v = parse_f64(location, key, raw)?;
            if v <= 0.0 {
                return Err(config_err(location, format!("`g1` must be > 0, got {v}")));
            }
            cfg.params.g1 = v;
        }
        "g2" => cfg.params.g2 = nonneg(parse_f64(location, key, raw)?)?,
        "d" => cfg.params.drive = nonneg(parse_f64(location, key, raw)?)?,
        "kappa" => cfg.params.kappa = nonneg(parse_f64(location, key, raw)?)?,
        "gamma" => cfg.params.gamma = nonneg(parse_f64(location, key, raw)?)?,
        "nph" => cfg.n_ph = parse_usize(location, key, raw)?,
        "ncav" => cfg.n_cavity = parse_usize(location, key, raw)?,
        "t_max" => cfg.t_max = nonneg(parse_f64(location, key, raw)?)?,
        "n_steps" => cfg.n_steps = parse_usize(location, key, raw)?,
        "sweep_min" => cfg.sweep_min = Some(parse_f64(location, key, raw)?),
        "sweep_max" => cfg.sweep_max = Some(parse_f64(location, key, raw)?),
        "sweep_steps" => cfg.sweep_steps = Some(parse_usize(location, key, raw)?),
        "ratio_min" => cfg.ratio_min = parse_f64(location, key, raw)?,
        "ratio_max" => cfg.ratio_max = parse_f64(location, key, raw)?,
        "ratio_steps" => cfg.ratio_steps = parse_usize(location, key, raw)?,
        "fit_min" => cfg.fit_min = Some(parse_f64(location, key, raw)?),
        "fit_max" => cfg.fit_max = Some(parse_f64(location, key, raw)?),
        "zero_tol" => {
            let v = parse_f64(location, key, raw)?;
            if v <= 0.0 {
                return Err(config_err(
                    location,
                    format!("`zero_tol` must be > 0, got {v}"),
                ));
            }
            cfg.zero_tol = v;
        }
        "nph_max" => cfg.nph_max = parse_usize(location, key, raw)?,
        "grid_step" => {
            let v = parse_f64(location, key, raw)?;
            if !(v > 0.0 && v <= 0.01) {
                return Err(config_err(
                    location,
                    format!("`grid_step` must be in (0, 0.01], got {v}"),
                ));
            }
            cfg.grid_step = v;
        }
        _ => return Err(config_err(location, format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Cross-key invariants, checked after all assignments.
pub fn validate(cfg: &RunConfig, location: &str) -> Result<()> {
    cfg.params
        .validate()
        .map_err(|e| config_err(location, e.to_string()))?;
    if cfg.n_cavity < cfg.n_ph + 3 {
        return Err(config_err(
            location,
            format!(
                "cavity truncation ncav = {} leaves no headroom; need ncav >= nph + 3 = {}",
                cfg.n_cavity,
                cfg.n_ph + 3
            ),
        ));
    }
    if cfg.n_steps < 2 {
        return Err(config_err(
            location,
            format!("n_steps must be >= 2, got {}", cfg.n_steps),
        ));
    }
    if let Some(s) = cfg.sweep_steps {
        if s < 2 {
            return Err(config_err(
                location,
                format!("sweep_steps must be >= 2, got {s}"),
            ));
        }
    }
    if cfg.ratio_steps < 2 {
        return Err(config_err(
            location,
            format!("ratio_steps must be >= 2, got {}", cfg.ratio_steps),
        ));
    }
    if !(cfg.ratio_min > 0.0 && cfg.ratio_max > cfg.ratio_min) {
        return Err(config_err(
            location,
            format!(
                "ratio grid needs 0 < ratio_min < ratio_max, got [{}, {}]",
                cfg.ratio_min, cfg.ratio_max
            ),
        ));
    }
    if let (Some(lo), Some(hi)) = (cfg.sweep_min, cfg.sweep_max) {
        if hi <= lo {
            return Err(config_err(
                location,
                format!("sweep grid needs sweep_min < sweep_max, got [{lo}, {hi}]"),
            ));
        }
    }
    Ok(())
}

/// Parse a `key = value` document (UTF-8, one pair per line, `#` comments).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut last_line = 0usize;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let location = format!("line {line_no}");
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err(&location, format!("expected `key = value`, got `{line}`"))
        })?;
        set_key(&mut cfg, key.trim(), value.trim(), &location)?;
        last_line = line_no;
    }
    validate(&cfg, &format!("line {last_line}"))?;
    Ok(cfg)
}

/// Apply `--set key=value` overrides on top of a parsed config.
pub fn apply_overrides(cfg: &mut RunConfig, sets: &[String]) -> Result<()> {
    for (i, item) in sets.iter().enumerate() {
        let location = format!("--set #{}", i + 1);
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| config_err(&location, format!("expected KEY=VALUE, got `{item}`")))?;
        set_key(cfg, key.trim(), value.trim(), &location)?;
    }
    validate(cfg, "--set")?;
    Ok(())
}
