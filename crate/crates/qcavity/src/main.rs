use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qcavity::commands::{run_command, CliCommand};
use qcavity::config::{apply_overrides, parse_config, RunConfig};
use qcavity::error::Error;

/// Qubit-pair-in-a-cavity simulator: entanglement thresholds, closed and
/// driven-dissipative dynamics, steady-state sweeps, and feature extraction.
#[derive(Parser, Debug)]
#[command(name = "qcavity", version, about)]
struct Cli {
    /// One of: threshold, closed, open, steady, sweep-drive, sweep-ratio,
    /// features.
    command: String,

    /// Config file with `key = value` lines and `#` comments.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set d=0.016 (repeatable; wins over the
    /// file).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output path for the CSV document (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<(), Error> {
    let command: CliCommand = cli.command.parse().map_err(|_| Error::Config {
        location: "command".into(),
        message: format!(
            "unknown command `{}`; expected threshold|closed|open|steady|sweep-drive|sweep-ratio|features",
            cli.command
        ),
    })?;

    let mut cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config {
                location: path.display().to_string(),
                message: format!("cannot read config file: {e}"),
            })?;
            parse_config(&text)?
        }
        None => parse_config("")?,
    };
    apply_overrides(&mut cfg, &cli.set)?;

    if !cfg.params.dispersive_ok(cfg.n_ph) {
        eprintln!("qcavity: warning: dispersive guard violated, |delta| < 10*max(g~1, g~2)");
    }

    let csv = run_command(command, &cfg)?;
    match &cli.out {
        Some(path) => fs::write(path, csv).map_err(|e| Error::Config {
            location: path.display().to_string(),
            message: format!("cannot write output: {e}"),
        })?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(csv.as_bytes()).map_err(|e| Error::Config {
                location: "stdout".into(),
                message: e.to_string(),
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcavity: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
