//! The three fluorescence sidebands. The lower one comes from the
//! recurrence, the central and upper ones from the dense reference.
//!
//! cargo run --example fluorescence

use dressed_laser::oracle::{Channel, OracleSolution};
use dressed_laser::params::{derive_dressed, BandFlags, FrequencyGrid, ModelConfig, Truncation};
use dressed_laser::spectra::{find_peaks, fluor_sum_rule};
use dressed_laser::{Model, SolverOptions};

fn main() -> dressed_laser::Result<()> {
    let cfg = ModelConfig::with_cos2_phi(1.0, 0.05, 5.0, 0.1, BandFlags::OPEN);
    let frame = derive_dressed(&cfg)?;
    let grid = FrequencyGrid::symmetric(15.0, 1201);

    let model = Model::from_frame(&frame, cfg.kappa, Truncation::adaptive(), &SolverOptions::default())?;
    let lower = model.fluor_lower_spectrum(&grid)?;
    let rule = fluor_sum_rule(&lower, model.lower_population());
    println!("lower sideband (n_max {}): sum rule rel err {:.2e}", model.n_max(), rule.rel_err);
    for p in find_peaks(&lower, 0.01) {
        println!("  peak {:+.4}", p.nu);
    }

    let dense = OracleSolution::solve(&frame, cfg.kappa, model.n_max().min(20))?;
    for ch in [Channel::FluorCentral, Channel::FluorUpper] {
        let s = dense.spectrum(ch, &grid)?;
        println!("{}: max {:.4e}", s.kind.as_str(), s.max_value());
        for p in find_peaks(&s, 0.01) {
            println!("  peak {:+.4}", p.nu);
        }
    }
    Ok(())
}
