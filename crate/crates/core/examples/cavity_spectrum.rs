//! Cavity spectrum of one preset as CSV on stdout, peaks on stderr.
//!
//! cargo run --example cavity_spectrum -- fig-moderate-pump > cavity.csv

use dressed_laser::cli::config::load_run_config;
use dressed_laser::cli::output::spectrum_csv;
use dressed_laser::spectra::{cavity_sum_rule, find_peaks};
use dressed_laser::{Model, SolverOptions};

fn main() -> dressed_laser::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig-moderate-pump".into());
    let cfg = load_run_config(&format!("preset:{name}"))?;
    let model = Model::solve(&cfg.model, &SolverOptions::default())?;
    let s = model.cavity_spectrum(&cfg.model.grid)?;

    let g1 = model.frame.g1;
    for p in find_peaks(&s, 0.01) {
        eprintln!("peak nu = {:+.4} (nu/g1 = {:+.4}), height {:.4e}", p.nu, p.nu / g1, p.height);
    }
    let rule = cavity_sum_rule(&s, &model.statistics());
    eprintln!("integral {:.6} vs 2 pi <n> = {:.6}", rule.integral, rule.expected);
    print!("{}", spectrum_csv(&s)?);
    Ok(())
}
