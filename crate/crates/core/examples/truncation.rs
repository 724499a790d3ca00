//! Adaptive Fock cutoff: how far the ladder climbs before the tail is
//! negligible, and where it cannot close.
//!
//! cargo run --example truncation

use dressed_laser::engine::auto_truncate;
use dressed_laser::params::{derive_dressed, BandFlags, ModelConfig};
use dressed_laser::SolverOptions;

fn main() {
    let opts = SolverOptions::default();
    for (kappa, band) in [(0.05, BandFlags::OPEN), (0.05, BandFlags::LOWER_GAP), (0.0, BandFlags::LOWER_GAP)] {
        for cos2 in [0.05, 0.5, 0.9] {
            let cfg = ModelConfig::with_cos2_phi(1.0, kappa, 5.0, cos2, band);
            let frame = derive_dressed(&cfg).unwrap();
            match auto_truncate(&frame, kappa, 1e-12, 512, &opts) {
                Ok(r) => println!(
                    "kappa {kappa:<5} gap {:<5} cos2 {cos2:<4} n_max {:>4} tail {:.1e}",
                    !band.minus, r.n_max, r.tail_mass
                ),
                Err(e) => println!("kappa {kappa:<5} gap {:<5} cos2 {cos2:<4} {e}", !band.minus),
            }
        }
    }
}
