//! Command-line front end of the `mcdiff` binary.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::harness::{
    order_table, rows_table, run_figure_sweep, sinr_table, theory_table, threshold_table, ExperimentConfig, Figure,
    Table, WORKERS_ENV,
};

#[derive(Debug, Parser)]
#[command(
    name = "mcdiff",
    version,
    about = "Derivative pre-processing receivers for diffusive molecular links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, short)]
    pub config: PathBuf,
    /// CSV output path; standard output if absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated derivative orders overriding the configured list.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form BER with theory-optimized thresholds.
    Theory {
        #[command(flatten)]
        common: Common,
        /// fstd or matd.
        #[arg(long, default_value = "fstd")]
        detector: DetectorKind,
    },
    /// Monte Carlo BER of every configured detector, order and molecule count.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Bit budget per point, e.g. 1e6.
        #[arg(long, value_parser = parse_count)]
        bits: Option<u64>,
        /// Adds a wall_time column (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// SINR components of the FSTD decision sample.
    Sinr {
        #[command(flatten)]
        common: Common,
    },
    /// SINR-optimal derivative order per molecule count.
    OptimizeOrder {
        #[command(flatten)]
        common: Common,
    },
    /// Optimized thresholds per the configured gamma policy.
    OptimizeThreshold {
        #[command(flatten)]
        common: Common,
    },
    /// Reproduces a figure grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid to run: fig4, fig5 (adds SINR), fig7 (sweeps every window) or fig8
        #[arg(long, value_parser = parse_figure)]
        figure: Figure,
        /// Bit budget per point, e.g. 1e6
        #[arg(long, value_parser = parse_count)]
        bits: Option<u64>,
        /// Adds a wall_time column (makes output run-dependent)
        #[arg(long)]
        timing: bool,
    },
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(v >= 0.0 && v.is_finite() && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(format!("not a non-negative integer count: {s:?}"));
    }
    Ok(v as u64)
}

fn parse_figure(s: &str) -> std::result::Result<Figure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(common: &Common, bits: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(m) = &common.m {
        cfg.orders = m.clone();
    }
    if let Some(bits) = bits {
        cfg.bit_budget = bits;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(table: &Table, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            table.write_csv(std::io::BufWriter::new(file))
        }
        None => table.write_csv(std::io::stdout().lock()),
    }
}

/// Executes a parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Theory { common, detector } => {
            let cfg = load(&common, None)?;
            emit(&theory_table(&cfg, detector, &cfg.orders)?, &common.out)
        }
        Command::Simulate { common, bits, timing } => {
            let cfg = load(&common, bits)?;
            emit(&rows_table(&run_figure_sweep(&cfg, Figure::Fig8)?, timing), &common.out)
        }
        Command::Sinr { common } => {
            let cfg = load(&common, None)?;
            emit(&sinr_table(&cfg, &cfg.orders)?, &common.out)
        }
        Command::OptimizeOrder { common } => {
            let cfg = load(&common, None)?;
            let max = cfg.orders.iter().copied().max().unwrap_or(0);
            emit(&order_table(&cfg, max)?, &common.out)
        }
        Command::OptimizeThreshold { common } => {
            let cfg = load(&common, None)?;
            emit(&threshold_table(&cfg, &cfg.orders)?, &common.out)
        }
        Command::Sweep {
            common,
            figure,
            bits,
            timing,
        } => {
            let cfg = load(&common, bits)?;
            emit(&rows_table(&run_figure_sweep(&cfg, figure)?, timing), &common.out)
        }
    }
}

/// Caps the global worker pool from the environment, if requested.
pub fn init_workers() -> Result<()> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {value:?}")))?;
    if n == 0 {
        return Err(Error::Config(format!("{WORKERS_ENV} must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return 2;
        }
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return 0;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "mcdiff: {e}");
            1
        }
    }
}
