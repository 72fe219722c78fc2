//! Experiment runner for zeta-sum moment experiments.
//!
//! Each subcommand reads its settings from an optional `key=value` file and
//! from flags (flags win), runs one computation from `zetalab-core`, and
//! writes a CSV or JSON table whose header records every resolved setting.
//! Exit status is 0 on success, 1 on errors and 2 when a checked property
//! fails.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;
pub mod pool;

pub use output::{Cell, Format, Report};
pub use pool::Pool;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] zetalab_core::Error),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Parser)]
#[command(name = "zetalab", version, about = "Moment experiments for zeta sums and random multiplicative functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Midpoint estimate of (1/T)∫|S(x,t)|^{2k} dt.
    Moment,
    /// Exact tuple expansion of the same integral (integer k).
    Oracle,
    /// Multiplicative energy: number of 2k-tuples with equal products.
    Energy,
    /// Monte Carlo moments of Steinhaus random multiplicative functions.
    Rmf,
    /// Factorized expectation of the exponential of the shifted prime sums.
    Lemma1,
    /// Subdivision, length inequality and the pointwise majorant sweep.
    ProxyCheck,
    /// Hölder lower bound from the weighted and proxy-power integrals.
    LowerBound,
    /// Correlation probe between shifts ℓ and ℓ'.
    Correlation,
    /// Exact shift double sum against its d-series limit.
    ShiftSum,
    /// Moments across a T sweep and the fitted log-log exponent.
    ExponentSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moment => "moment",
            Command::Oracle => "oracle",
            Command::Energy => "energy",
            Command::Rmf => "rmf",
            Command::Lemma1 => "lemma1",
            Command::ProxyCheck => "proxy-check",
            Command::LowerBound => "lower-bound",
            Command::Correlation => "correlation",
            Command::ShiftSum => "shift-sum",
            Command::ExponentSweep => "exponent-sweep",
        }
    }
}

/// Flags shared by every subcommand; values are validated when read.
#[derive(Debug, Default, Args)]
pub struct Opts {
    /// Flat key=value settings file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Sum length x.
    #[arg(long, global = true)]
    pub x: Option<String>,
    /// Integration horizon T.
    #[arg(long = "T", visible_alias = "t-max", global = true)]
    pub t_max: Option<String>,
    /// ln x, for symbolic scales.
    #[arg(long = "ln-x", global = true)]
    pub ln_x: Option<String>,
    #[arg(long, global = true)]
    pub y: Option<String>,
    #[arg(long = "ln-y", global = true)]
    pub ln_y: Option<String>,
    /// Moment parameter k.
    #[arg(long, global = true)]
    pub k: Option<String>,
    /// Power 2k of |S| for `moment`.
    #[arg(long = "two-k", global = true)]
    pub two_k: Option<String>,
    /// Scale exponent: y = x^{1/c0}.
    #[arg(long, global = true)]
    pub c0: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub threads: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Sets J_M directly (desk mode).
    #[arg(long = "desk-jm", global = true)]
    pub desk_jm: Option<String>,
    /// Number of scales M in desk mode.
    #[arg(long = "desk-m", global = true)]
    pub desk_m: Option<String>,
    /// Ratio of successive log-scales.
    #[arg(long = "step-ratio", global = true)]
    pub step_ratio: Option<String>,
    /// Quadrature step.
    #[arg(long, global = true)]
    pub dt: Option<String>,
    /// Quadrature points (alternative to --dt).
    #[arg(long, global = true)]
    pub points: Option<String>,
    /// Monte Carlo samples.
    #[arg(long, global = true)]
    pub samples: Option<String>,
    /// Quadrature nodes per prime for `lemma1`.
    #[arg(long, global = true)]
    pub nodes: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub ell: Option<String>,
    /// Comma-separated shifts ℓ'.
    #[arg(long = "ell-prime", global = true, allow_hyphen_values = true)]
    pub ell_prime: Option<String>,
    /// Comma-separated T values for `exponent-sweep`.
    #[arg(long = "t-values", global = true)]
    pub t_values: Option<String>,
    /// Random t points for the majorant sweep.
    #[arg(long = "t-samples", global = true)]
    pub t_samples: Option<String>,
    /// Largest J inflation factor searched by `proxy-check`.
    #[arg(long = "max-factor", global = true)]
    pub max_factor: Option<String>,
}

impl Opts {
    fn flag_values(&self) -> BTreeMap<&'static str, String> {
        let pairs: [(&'static str, &Option<String>); 24] = [
            ("x", &self.x),
            ("T", &self.t_max),
            ("ln-x", &self.ln_x),
            ("y", &self.y),
            ("ln-y", &self.ln_y),
            ("k", &self.k),
            ("two-k", &self.two_k),
            ("c0", &self.c0),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out", &self.out),
            ("format", &self.format),
            ("desk-jm", &self.desk_jm),
            ("desk-m", &self.desk_m),
            ("step-ratio", &self.step_ratio),
            ("dt", &self.dt),
            ("points", &self.points),
            ("samples", &self.samples),
            ("nodes", &self.nodes),
            ("ell", &self.ell),
            ("ell-prime", &self.ell_prime),
            ("t-values", &self.t_values),
            ("t-samples", &self.t_samples),
            ("max-factor", &self.max_factor),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(violation) => {
            if violation {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("zetalab {}: {e}", cli.command.name());
            1
        }
    }
}

/// Runs one parsed command; `Ok(true)` when a property check failed.
pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.opts.config {
        Some(p) => config::read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let settings = config::Settings::new(file, cli.opts.flag_values());
    let format: Format = settings.get("format", Format::Csv)?;
    let out: Option<String> = settings.peek("out")?;
    let report = commands::dispatch(cli.command, &settings)?;
    let body = report.render(format);
    match out {
        Some(path) => output::write_atomic(std::path::Path::new(&path), &body)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report.violation)
}
