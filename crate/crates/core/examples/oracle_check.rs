//! Recurrence solver against the dense Liouvillian at a shared cutoff.
//!
//! cargo run --example oracle_check -- 0.6 8

use dressed_laser::oracle::{Channel, OracleSolution};
use dressed_laser::params::{derive_dressed, BandFlags, FrequencyGrid, ModelConfig, Truncation};
use dressed_laser::{Model, SolverOptions};

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max)
}

fn main() -> dressed_laser::Result<()> {
    let mut args = std::env::args().skip(1);
    let cos2: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.6);
    let n_max: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);

    let cfg = ModelConfig::with_cos2_phi(1.0, 0.05, 5.0, cos2, BandFlags::OPEN);
    let frame = derive_dressed(&cfg)?;
    let grid = FrequencyGrid::symmetric(15.0, 401);
    let model = Model::from_frame(&frame, cfg.kappa, Truncation::Fixed(n_max), &SolverOptions::default())?;
    let dense = OracleSolution::solve(&frame, cfg.kappa, n_max)?;

    let steady = model.steady.max_abs_diff(&dense.steady_blocks());
    println!("steady state max diff   {steady:.2e}");
    println!("<n> engine {:.10}  dense {:.10}", model.statistics().mean_n, dense.mean_photon_number());

    let c = max_rel(&model.cavity_spectrum(&grid)?.values, &dense.spectrum(Channel::Cavity, &grid)?.values);
    let f = max_rel(&model.fluor_lower_spectrum(&grid)?.values, &dense.spectrum(Channel::FluorLower, &grid)?.values);
    println!("cavity spectrum max rel {c:.2e}");
    println!("lower fluorescence max rel {f:.2e}");
    Ok(())
}
