//! Suppressing the lower sideband reservoir: the fluorescence line
//! vanishes and the cavity picks up the inner ladder transitions.
//!
//! cargo run --example band_gap -- 0.1

use dressed_laser::ladder::sideband_offsets;
use dressed_laser::params::{BandFlags, ModelConfig};
use dressed_laser::spectra::find_peaks;
use dressed_laser::{Model, SolverOptions};

fn main() -> dressed_laser::Result<()> {
    let cos2: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    for (label, band) in [("open", BandFlags::OPEN), ("lower gap", BandFlags::LOWER_GAP)] {
        let cfg = ModelConfig::with_cos2_phi(1.0, 0.05, 5.0, cos2, band);
        let model = Model::solve(&cfg, &SolverOptions::default())?;
        let g1 = model.frame.g1;
        let cav = model.cavity_spectrum(&cfg.grid)?;
        let fl = model.fluor_lower_spectrum(&cfg.grid)?;
        println!(
            "{label}: gamma- = {:.4}, <n> = {:.4}, max S- = {:.3e}",
            model.frame.gamma_minus,
            model.statistics().mean_n,
            fl.max_value()
        );
        for p in find_peaks(&cav, 0.01) {
            println!("  cavity peak nu/g1 = {:+.5}", p.nu / g1);
        }
    }
    let (inner, outer) = sideband_offsets(1.0, 1);
    println!("ladder n = 1: inner {inner:.5}, outer {outer:.5} (units of g1)");
    Ok(())
}
