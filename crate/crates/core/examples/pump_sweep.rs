//! Cavity line count as the pump rate grows: split doublet, multiplet,
//! single lasing line.
//!
//! cargo run --example pump_sweep

use dressed_laser::params::{BandFlags, ModelConfig};
use dressed_laser::spectra::{find_peaks, fwhm};
use dressed_laser::{Model, SolverOptions};

fn main() -> dressed_laser::Result<()> {
    println!("{:>8} {:>8} {:>10} {:>6} {:>10}", "cos2phi", "gamma+", "<n>", "peaks", "fwhm");
    for i in 1..=18 {
        let cos2 = 0.05 * i as f64;
        let cfg = ModelConfig::with_cos2_phi(1.0, 0.05, 5.0, cos2, BandFlags::OPEN);
        let model = Model::solve(&cfg, &SolverOptions::default())?;
        let s = model.cavity_spectrum(&cfg.grid)?;
        println!(
            "{:>8.2} {:>8.4} {:>10.4} {:>6} {:>10.4}",
            cos2,
            model.frame.gamma_plus,
            model.statistics().mean_n,
            find_peaks(&s, 0.01).len(),
            fwhm(&s).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
