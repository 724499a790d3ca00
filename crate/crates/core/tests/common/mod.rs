#![allow(dead_code)]

use dressed_laser::params::{derive_dressed, BandFlags, ModelConfig};
use dressed_laser::DressedFrame;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub const GAMMA: f64 = 1.0;
pub const KAPPA: f64 = 0.05;
pub const G: f64 = 5.0;

pub fn config(cos2: f64, band: BandFlags) -> ModelConfig {
    ModelConfig::with_cos2_phi(GAMMA, KAPPA, G, cos2, band)
}

pub fn frame(cos2: f64, band: BandFlags) -> DressedFrame {
    derive_dressed(&config(cos2, band)).unwrap()
}

/// Random Hermitian matrix with unit-scale entries.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let x = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&x + x.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}
