//! `selfrepel`: batch experiments for the self-repelling walk.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error
//! (including cap exhaustion), 3 failed acceptance check.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{Check, Format, Route, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Failed(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<selfrepel_core::Error> for CliError {
    fn from(e: selfrepel_core::Error) -> Self {
        use selfrepel_core::Error as E;
        match e {
            E::InvalidWeight(_) | E::InvalidParameter { .. } | E::EnumerationTooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "selfrepel", version, about = "Self-repelling walk experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat TOML config; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// fig1-base2, fig1-base10, fig2-base2, fig2-base10 or acceptance.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Exponential weight w(k) = base^k.
    #[arg(long, global = true)]
    base: Option<f64>,
    /// File of `z,w` lines on consecutive integers.
    #[arg(long, global = true)]
    weight_table: Option<PathBuf>,
    /// Ratio w(z+1)/w(z) beyond the table.
    #[arg(long, global = true)]
    tail_ratio: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Walk trajectories with ±√n hull data.
    Simulate {
        #[arg(long)]
        steps: Option<u64>,
        /// Keep every stride-th step.
        #[arg(long)]
        stride: Option<u64>,
        /// Also dump the oriented local-time field.
        #[arg(long)]
        field: bool,
        /// With --r, also run until the inverse local time at j.
        #[arg(long, allow_hyphen_values = true)]
        j: Option<i64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
    },
    /// Stopped local-time profile with the tent overlay.
    Profile {
        #[arg(long, allow_hyphen_values = true)]
        j: Option<i64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
        #[arg(long)]
        replicate: Option<u64>,
        #[arg(long, value_enum)]
        route: Option<Route>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Stationary law of the η chain.
    Stationary {
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Exact total-variation decay of the η chain.
    Converge {
        #[arg(long)]
        m_max: Option<usize>,
        /// Start of the log-linear fit window.
        #[arg(long)]
        m_lo: Option<u64>,
    },
    /// Coalescence times of coupled η chains.
    Couple {
        #[arg(long)]
        pairs: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        m_lo: Option<u64>,
        /// Survivors needed for a survival point to enter the fit.
        #[arg(long)]
        min_count: Option<usize>,
    },
    /// Hitting times of zero for the local-time chain.
    Hitting {
        #[arg(long, value_delimiter = ',')]
        r_values: Option<Vec<u64>>,
        #[arg(long)]
        replicates: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
        /// Also estimate the constant of the bound (2+δ)r + K.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Limit-theorem checks and the acceptance suite.
    Limits {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, value_enum)]
        check: Option<Check>,
        /// Criteria to run with --suite (default all).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
        /// Enumeration depth.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        a_values: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        replicates: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Profile { .. } => "profile",
            Command::Stationary { .. } => "stationary",
            Command::Converge { .. } => "converge",
            Command::Couple { .. } => "couple",
            Command::Hitting { .. } => "hitting",
            Command::Limits { .. } => "limits",
        }
    }

    fn to_config(&self) -> RunConfig {
        let d = RunConfig::default();
        match self {
            Command::Simulate { steps, stride, field, j, r, sign } => RunConfig {
                steps: *steps,
                stride: *stride,
                field: field.then_some(true),
                j: *j,
                r: *r,
                sign: sign.clone(),
                ..d
            },
            Command::Profile { j, r, sign, replicate, route, cap } => RunConfig {
                j: *j,
                r: *r,
                sign: sign.clone(),
                replicate: *replicate,
                route: *route,
                cap: *cap,
                ..d
            },
            Command::Stationary { tolerance } => RunConfig {
                tolerance: *tolerance,
                ..d
            },
            Command::Converge { m_max, m_lo } => RunConfig {
                m_max: *m_max,
                m_lo: *m_lo,
                ..d
            },
            Command::Couple { pairs, cap, m_lo, min_count } => RunConfig {
                pairs: *pairs,
                cap: *cap,
                m_lo: *m_lo,
                min_count: *min_count,
                ..d
            },
            Command::Hitting { r_values, replicates, cap, delta } => RunConfig {
                r_values: r_values.clone(),
                replicates: *replicates,
                cap: *cap,
                delta: *delta,
                ..d
            },
            Command::Limits { suite, check, criteria, n, a, a_values, x, h, s, t, samples, replicates, cap } => {
                RunConfig {
                    suite: suite.clone(),
                    check: *check,
                    criteria: criteria.clone(),
                    n: *n,
                    a: *a,
                    a_values: a_values.clone(),
                    x: *x,
                    h: *h,
                    s: *s,
                    t: *t,
                    samples: *samples,
                    replicates: *replicates,
                    cap: *cap,
                    ..d
                }
            }
        }
    }
}

impl Common {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            preset: self.preset.clone(),
            base: self.base,
            weight_table: self.weight_table.clone(),
            tail_ratio: self.tail_ratio,
            seed: self.seed,
            threads: self.threads,
            out: self.out.clone(),
            format: self.format,
            ..RunConfig::default()
        }
    }
}

/// Preset, then file, then flags.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let flags = cli.common.to_config().overlay(cli.command.to_config());
    let file = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = file.overlay(flags);
    if let Some(name) = cfg.preset.clone() {
        cfg = commands::preset_config(&name, cli.command.name())?.overlay(cfg);
    }
    cfg.seed.get_or_insert(selfrepel_suite::DEFAULT_SEED);
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let cmd = cli.command.name();
    match cmd {
        "simulate" => commands::simulate(&cfg),
        "profile" => commands::profile(&cfg),
        "stationary" => commands::stationary(&cfg),
        "converge" => commands::converge(&cfg),
        "couple" => commands::couple(&cfg),
        "hitting" => commands::hitting(&cfg),
        _ => commands::limits(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selfrepel: {e}");
            ExitCode::from(e.code())
        }
    }
}
