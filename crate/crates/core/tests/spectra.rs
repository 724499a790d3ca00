mod common;

use common::{config, frame, KAPPA};
use dressed_laser::engine::build_generator;
use dressed_laser::params::{BandFlags, FrequencyGrid, Truncation};
use dressed_laser::spectra::{cavity_correlation, correlation_at_zero, regression_seed_cavity};
use dressed_laser::{Model, SolverOptions};
use num_complex::Complex64;

#[test]
fn equal_time_limit_recovers_moments() {
    for (cos2, band) in [(0.05, BandFlags::OPEN), (0.5, BandFlags::OPEN), (0.3, BandFlags::LOWER_GAP)] {
        let model = Model::solve(&config(cos2, band), &SolverOptions::default()).unwrap();
        let (cav, fl) = correlation_at_zero(&model.steady, &model.gen_m1, &SolverOptions::default()).unwrap();
        let n = model.statistics().mean_n;
        let p = model.lower_population();
        assert!(cav.im.abs() <= 1e-8 * n && (cav.re - n).abs() <= 1e-8 * n, "{cav} vs {n}");
        assert!(fl.im.abs() <= 1e-8 * p && (fl.re - p).abs() <= 1e-8 * p, "{fl} vs {p}");
    }
}

#[test]
fn shift_sign_mirrors_the_spectrum() {
    let f = frame(0.4, BandFlags::OPEN);
    let opts = SolverOptions::default();
    let model = Model::from_frame(&f, KAPPA, Truncation::Fixed(12), &opts).unwrap();
    let grid = FrequencyGrid::new(-7.0, 3.0, 201);
    let mirrored = FrequencyGrid::new(-3.0, 7.0, 201);
    let s = model.cavity_spectrum(&grid).unwrap();
    let m = model.cavity_spectrum(&mirrored).unwrap();
    let gen = build_generator(&f, KAPPA, 1, 12).unwrap();
    let seed = regression_seed_cavity(&model.steady);
    for (i, (nu, v)) in s.nu.iter().zip(&s.values).enumerate() {
        let mirror = m.values[200 - i];
        // The cavity spectrum solves at s = -i nu; the flipped sign gives S(-nu).
        let flipped = 2.0 * cavity_correlation(&gen, &seed, Complex64::new(0.0, *nu), &opts).unwrap().re;
        assert!((flipped - mirror).abs() <= 1e-10 * mirror.abs(), "nu = {nu}");
        // Real generator and real steady state: S is even.
        assert!((mirror - v).abs() <= 1e-10 * v.abs(), "nu = {nu}");
    }
}
