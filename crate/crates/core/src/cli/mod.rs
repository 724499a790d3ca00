//! Command-line front end: `run`, `sweep` and `peaks`.

pub mod config;
pub mod output;
pub mod runner;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "DRESSED_LASER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dressed-laser", version, about = "Spectra of a single-atom dressed-state laser")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration (a JSON file or `preset:NAME`).
    Run {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the dense reference and write a comparison report.
        #[arg(long)]
        oracle: bool,
    },
    /// Repeat a run over values of one parameter.
    Sweep {
        config: String,
        #[arg(long)]
        axis: String,
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Match spectrum peaks against the ladder prediction of the same run.
    Peaks { spectrum: PathBuf, ladder: PathBuf },
    /// List the built-in presets.
    Presets,
}

pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config(THREADS_ENV, format!("expected a positive integer, got `{raw}`")))?;
    // A pool that is already initialized keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Run { config, out, oracle } => {
            let mut cfg = config::load_run_config(&config)?;
            cfg.oracle |= oracle;
            let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let outcome = runner::run(&cfg, &dir)?;
            println!("run {} -> {}", outcome.run_id, outcome.dir.display());
            println!(
                "<n> = {:.6}  Q = {:.6}  n_max = {}",
                outcome.statistics.mean_n,
                outcome.statistics.mandel_q,
                outcome.statistics.p_n.len() - 1
            );
        }
        Command::Sweep { config, axis, values, out } => {
            let cfg = config::load_run_config(&config)?;
            let axis: config::SweepAxis = axis.parse()?;
            let values = config::parse_values(&values)?;
            let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("sweep"));
            let summary = runner::sweep(&cfg, axis, &values, &dir)?;
            for p in &summary.points {
                match (&p.error, p.cavity_peak_count) {
                    (None, Some(n)) => println!(
                        "{} = {:<10} peaks = {n:<3} <n> = {:.4}",
                        summary.axis,
                        p.value,
                        p.mean_n.unwrap_or(f64::NAN)
                    ),
                    (Some(e), _) => println!("{} = {:<10} failed: {e}", summary.axis, p.value),
                    _ => {}
                }
            }
            if summary.partial_failure {
                eprintln!("warning: some sweep points failed");
            }
        }
        Command::Peaks { spectrum, ladder } => {
            let report = runner::peaks(&spectrum, &ladder)?;
            print!("{}", output::to_json(&report)?);
        }
        Command::Presets => {
            for p in config::PRESETS {
                println!("{:<22} cos^2(phi) = {:<5} {}", p.name, p.cos2_phi, p.description);
            }
        }
    }
    Ok(())
}

/// Parse arguments, run, and return the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
