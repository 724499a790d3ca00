//! Dressed-state ladder: predicted lines and populations against the
//! numerical steady state.
//!
//! cargo run --example ladder

use dressed_laser::ladder::ladder_populations;
use dressed_laser::params::{derive_dressed, BandFlags, ModelConfig, Truncation};
use dressed_laser::{Model, SolverOptions};

fn main() -> dressed_laser::Result<()> {
    // Strong coupling so the secular picture applies.
    let cfg = ModelConfig::with_cos2_phi(1.0, 0.05, 100.0, 0.5, BandFlags::OPEN);
    let frame = derive_dressed(&cfg)?;
    let model = Model::from_frame(&frame, cfg.kappa, Truncation::adaptive(), &SolverOptions::default())?;

    let prediction = model.ladder(4)?;
    println!("{:>4} {:>6} {:>12} {:>10}", "n", "kind", "nu", "weight");
    for p in &prediction.peaks {
        println!("{:>4} {:>6} {:>12.4} {:>10.3e}", p.n, format!("{:?}", p.kind), p.nu, p.weight.unwrap_or(f64::NAN));
    }

    let closed = ladder_populations(&frame, cfg.kappa, 8)?;
    let proj = model.projected_populations();
    println!("\n{:>4} {:>12} {:>12} {:>12}", "n", "closed form", "Pi_+n", "Pi_-n");
    for (n, pi) in closed.iter().enumerate() {
        println!("{:>4} {:>12.5e} {:>12.5e} {:>12.5e}", n, pi, proj.plus_at(n), proj.minus_at(n));
    }
    Ok(())
}
