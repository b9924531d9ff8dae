//! `igs` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 verification
//! failure. dB values are converted to linear here and nowhere else.

pub mod record;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use igs_core::oracle::OracleConfig;
use igs_core::rate::{ChannelRealization, ScenarioParams};
use igs_core::solver::{self, StrategyDecision};
use igs_core::{run_sweep, ExecutionMode, ExperimentConfig, Sampling};
use serde::Serialize;
use thiserror::Error;

use crate::record::{records_from_sweep, write_csv, write_json, SCHEMA_VERSION};
use crate::verify::{random_cases, verify_cases, ReplayCase, Tolerances, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("verification failed: {0} check(s) exceeded tolerance")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::VerifyFailed(_) => 3,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A list of dB values: `a,b,c` or an inclusive range `start:step:stop`.
#[derive(Debug, Clone, PartialEq)]
pub struct DbList(pub Vec<f64>);

impl FromStr for DbList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |t: &str| {
            let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{t}` is not finite"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, step, stop] => {
                let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
                if step <= 0.0 || stop < start {
                    return Err(format!("range `{s}` needs step > 0 and stop >= start"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok(DbList((0..=n).map(|i| start + i as f64 * step).collect()))
            }
            [_] => {
                let values = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
                Ok(DbList(values))
            }
            _ => Err(format!("`{s}` is neither a comma list nor start:step:stop")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "igs",
    version,
    about = "Proper vs improper signaling for an underlay secondary user"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Random seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format for `sweep` and `verify`; `policy` always writes JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo sweep of averaged SU rates over SU SNR.
    Sweep(SweepArgs),
    /// Optimal strategy for a single channel realization.
    Policy(PolicyArgs),
    /// Cross-check the closed forms against brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// PU loading factor in [0, 1].
    #[arg(long)]
    pub alpha: f64,
    /// PU SNRs in dB.
    #[arg(long, default_value = "10,20,30")]
    pub snr_pu_db: DbList,
    /// SU SNRs in dB.
    #[arg(long, default_value = "0:2.5:30")]
    pub snr_su_db: DbList,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Draw fresh channels for every sweep point.
    #[arg(long)]
    pub independent_sampling: bool,
    /// Run on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// |h|², PU-PU
    #[arg(long)]
    pub h2: f64,
    /// |d|², PU-SU
    #[arg(long)]
    pub d2: f64,
    /// |g|², SU-PU
    #[arg(long)]
    pub g2: f64,
    /// |f|², SU-SU
    #[arg(long)]
    pub f2: f64,
    /// PU transmit power (and budget).
    #[arg(long)]
    pub pu_power: f64,
    /// SU power budget.
    #[arg(long)]
    pub su_power: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Number of random scenarios.
    #[arg(long, default_value_t = 1000)]
    pub scenarios: usize,
    /// Points in the circularity-coefficient grid search.
    #[arg(long, default_value_t = 1001)]
    pub kappa_grid: usize,
    /// Re-run a single case saved from a failed verification.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep(args) => cmd_sweep(cli, args),
        Command::Policy(args) => cmd_policy(cli, args),
        Command::Verify(args) => cmd_verify(cli, args),
    }
}

pub fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<(), CliError> {
    let config = ExperimentConfig {
        trials: args.trials,
        seed: cli.seed,
        sampling: if args.independent_sampling {
            Sampling::Independent
        } else {
            Sampling::CommonRandomNumbers
        },
        execution: if args.sequential {
            ExecutionMode::Sequential
        } else {
            ExecutionMode::Parallel
        },
        ..ExperimentConfig::new(
            args.alpha,
            args.snr_pu_db.0.iter().copied().map(db_to_linear).collect(),
            args.snr_su_db.0.iter().copied().map(db_to_linear).collect(),
        )
    };
    let result = run_sweep(&config).map_err(invalid)?;
    let records = records_from_sweep(&result, &args.snr_pu_db.0, &args.snr_su_db.0);
    let mut out = open_output(cli.out.as_deref())?;
    match cli.format {
        Format::Csv => write_csv(&mut out, &records)?,
        Format::Json => write_json(&mut out, &records)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct PolicyReport {
    pub schema_version: u32,
    #[serde(flatten)]
    pub decision: StrategyDecision,
    /// Proper-signaling allowed power; null when unbounded.
    pub q_proper_allowed: Option<f64>,
    /// Allowed power at `κ = 1`; null when unbounded.
    pub q_max_improper_allowed: Option<f64>,
}

pub fn policy_report(scenario: &ScenarioParams, channel: &ChannelRealization) -> PolicyReport {
    PolicyReport {
        schema_version: SCHEMA_VERSION,
        decision: solver::select_strategy(scenario, channel),
        q_proper_allowed: solver::allowed_power_proper(scenario, channel).finite(),
        q_max_improper_allowed: solver::allowed_power(1.0, scenario, channel).finite(),
    }
}

pub fn cmd_policy(cli: &Cli, args: &PolicyArgs) -> Result<(), CliError> {
    let scenario = ScenarioParams::new(args.pu_power, args.su_power, args.sigma2, args.alpha).map_err(invalid)?;
    let channel = ChannelRealization::from_squared_moduli(args.h2, args.d2, args.g2, args.f2).map_err(invalid)?;
    let mut out = open_output(cli.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &policy_report(&scenario, &channel)).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_report<W: Write>(mut out: W, report: &VerifyReport, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["check", "checked", "max_deviation", "tolerance", "failures"])?;
            for c in &report.checks {
                w.write_record([
                    c.check.name().to_string(),
                    c.checked.to_string(),
                    record::sig17(c.max_deviation),
                    record::sig17(c.tolerance),
                    c.failures.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    let (cases, tolerances, grid) = match &args.replay {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let case: ReplayCase = serde_json::from_str(&text).map_err(invalid)?;
            let grid = case.kappa_grid.unwrap_or(args.kappa_grid);
            (
                vec![(case.scenario, case.channel)],
                case.tolerances.unwrap_or_default(),
                grid,
            )
        }
        None => {
            if args.scenarios == 0 {
                return Err(invalid("--scenarios must be at least 1"));
            }
            (
                random_cases(args.scenarios, cli.seed),
                Tolerances::default(),
                args.kappa_grid,
            )
        }
    };
    let config = OracleConfig {
        kappa_grid_steps: grid,
        ..OracleConfig::default()
    };
    config.validate().map_err(invalid)?;
    let report = verify_cases(&cases, &tolerances, &config).map_err(|e| CliError::Invalid(e.to_string()))?;

    let mut out = open_output(cli.out.as_deref())?;
    write_report(&mut out, &report, cli.format)?;
    out.flush()?;

    if report.passed {
        Ok(())
    } else {
        for case in &report.failing_cases {
            eprintln!("replay: {}", serde_json::to_string(case).map_err(io::Error::from)?);
        }
        Err(CliError::VerifyFailed(report.failure_count()))
    }
}
