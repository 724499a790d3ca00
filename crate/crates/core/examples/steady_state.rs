//! Steady-state photon statistics across the pump presets.
//!
//! cargo run --example steady_state

use dressed_laser::cli::config::{load_run_config, PRESETS};
use dressed_laser::{Model, SolverOptions};

fn main() -> dressed_laser::Result<()> {
    println!("{:<22} {:>6} {:>10} {:>10} {:>10}", "preset", "n_max", "<n>", "Q", "tail");
    for p in PRESETS {
        let cfg = load_run_config(&format!("preset:{}", p.name))?;
        let model = Model::solve(&cfg.model, &SolverOptions::default())?;
        let stats = model.statistics();
        println!(
            "{:<22} {:>6} {:>10.5} {:>10.5} {:>10.2e}",
            p.name,
            model.n_max(),
            stats.mean_n,
            stats.mandel_q,
            model.truncation.tail_mass
        );
    }
    Ok(())
}
