mod common;

use common::{frame, KAPPA};
use dressed_laser::engine::{apply_generator, build_generator, resolvent_solve, BlockVector};
use dressed_laser::oracle::{Channel, OracleSolution};
use dressed_laser::params::{BandFlags, FrequencyGrid};
use dressed_laser::{DressedFrame, SolverOptions};
use nalgebra::{DMatrix, DVector, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_rhs(len: usize, seed: u64) -> BlockVector {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let entries =
        (0..len).map(|_| Vector4::from_fn(|_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    BlockVector { m: 1, entries }
}

fn flatten(z: &BlockVector) -> Vec<Complex64> {
    z.entries.iter().flat_map(|v| v.iter().copied()).collect()
}

fn unflatten(m: usize, x: &[Complex64]) -> BlockVector {
    BlockVector { m, entries: x.chunks(4).map(Vector4::from_column_slice).collect() }
}

/// `int_0^T e^{-s t} Z(t) dt` for `Z' = L Z`, by classical RK4 on the pair
/// `W = e^{-s t} Z`, `I' = W`.
fn laplace_by_stepping<F>(apply: F, z0: &[Complex64], s: Complex64, t_end: f64, steps: usize) -> Vec<Complex64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let dt = t_end / steps as f64;
    let rhs = |w: &[Complex64]| -> Vec<Complex64> { apply(w).iter().zip(w).map(|(lw, wi)| lw - s * wi).collect() };
    let axpy = |a: &[Complex64], k: f64, b: &[Complex64]| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x + y * k).collect()
    };
    let mut w = z0.to_vec();
    let mut acc = vec![c(0.0, 0.0); w.len()];
    for _ in 0..steps {
        let k1 = rhs(&w);
        let w2 = axpy(&w, 0.5 * dt, &k1);
        let k2 = rhs(&w2);
        let w3 = axpy(&w, 0.5 * dt, &k2);
        let k3 = rhs(&w3);
        let w4 = axpy(&w, dt, &k3);
        let k4 = rhs(&w4);
        for i in 0..w.len() {
            acc[i] += (w[i] + (w2[i] + w3[i]) * 2.0 + w4[i]) * (dt / 6.0);
            w[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    acc
}

fn dense(len: usize, apply: impl Fn(&[Complex64]) -> Vec<Complex64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(len, len);
    for j in 0..len {
        let mut e = vec![c(0.0, 0.0); len];
        e[j] = c(1.0, 0.0);
        for (i, v) in apply(&e).iter().enumerate() {
            m[(i, j)] = v.re;
        }
    }
    m
}

fn slowest_decay(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|l| -l.re).filter(|r| *r > 1e-9).fold(f64::INFINITY, f64::min)
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn large_shift_asymptote() {
    let f = frame(0.5, BandFlags::OPEN);
    let gen = build_generator(&f, KAPPA, 1, 8).unwrap();
    let rhs = random_rhs(gen.block_count(), 1);
    let s = c(1e6 * f.max_rate().max(KAPPA), 0.0);
    let x = resolvent_solve(&gen, s, &rhs, &SolverOptions::default()).unwrap();
    for (xv, bv) in flatten(&x).iter().zip(flatten(&rhs)) {
        assert!((xv * s - bv).norm() <= 1e-3 * bv.norm(), "{xv} vs {bv}");
    }
}

#[test]
fn decoupled_block_inverse() {
    let base = frame(0.5, BandFlags::OPEN);
    let f = DressedFrame::from_rates(0.0, base.gamma0, base.gamma_plus, base.gamma_minus);
    let kappa = 0.3;
    let gen = build_generator(&f, kappa, 1, 8).unwrap();
    let n = 4;
    let mut rhs = BlockVector::zeros(1, gen.block_count());
    rhs.entries[n] = Vector4::new(c(1.0, 0.5), c(-0.7, 0.2), c(0.3, -1.1), c(0.9, 0.4));
    let s = c(0.2, 1.3);
    let x = resolvent_solve(&gen, s, &rhs, &SolverOptions::default()).unwrap();

    // Hand inverse of s - B_n at g1 = 0, beta = n + 1/2.
    let b = n as f64 + 0.5;
    let (gp, gm, gc) = (f.gamma_plus, f.gamma_minus, f.coherence_decay);
    let r = rhs.entries[n];
    let x0 = r[0] / (s + kappa * b);
    let x1 = (r[1] - x0 * (gp - gm)) / (s + gp + gm + kappa * b);
    let x3 = r[3] / (s + gc + kappa * (b + 0.5));
    let x2 = (r[2] - x3 * kappa) / (s + gc + kappa * (b - 0.5));
    let expect = [x0, x1, x2, x3];
    for k in 0..4 {
        assert!((x.entries[n][k] - expect[k]).norm() < 1e-13, "component {k}");
    }
    for k in n + 1..gen.block_count() {
        assert!(x.entries[k].iter().all(|v| v.norm() < 1e-14));
    }
    // One rung down the cavity feeds in through C_{n-1} = sqrt(n (n + 1)) kappa.
    let feed = (n as f64 * (n as f64 + 1.0)).sqrt() * kappa;
    assert!((x.entries[n - 1][0] - x0 * feed / (s + kappa * (b - 1.0))).norm() < 1e-13);
}

#[test]
fn resolvent_matches_time_stepping() {
    let f = frame(0.5, BandFlags::OPEN);
    let kappa = 0.5;
    let gen = build_generator(&f, kappa, 1, 6).unwrap();
    let apply = |x: &[Complex64]| flatten(&apply_generator(&gen, &unflatten(1, x)).unwrap());
    let len = 4 * gen.block_count();
    let t_end = 50.0 / slowest_decay(&dense(len, apply));
    let steps = (t_end * gen.norm_inf() / 0.05).ceil() as usize;

    let rhs = random_rhs(gen.block_count(), 7);
    for s in [c(0.0, 0.0), c(0.0, 1.7), c(0.0, -2.4), c(0.4, 0.9)] {
        let x = resolvent_solve(&gen, s, &rhs, &SolverOptions::default()).unwrap();
        let t = laplace_by_stepping(apply, &flatten(&rhs), s, t_end, steps);
        let err = rel_diff(&flatten(&x), &t);
        assert!(err < 1e-6, "s = {s}: {err:e}");
    }
}

#[test]
fn central_fluorescence_matches_time_stepping() {
    let base = frame(0.5, BandFlags::OPEN);
    let f = DressedFrame::from_rates(1e-3, base.gamma0, base.gamma_plus, base.gamma_minus);
    let sol = OracleSolution::solve(&f, KAPPA, 2).unwrap();
    let l = &sol.liouvillian;
    let r3 = &l.ops.r3;
    let rho = &sol.rho;
    let seed = r3 * rho - rho * (r3 * rho).trace();
    let z0: Vec<Complex64> = seed.iter().map(|x| c(*x, 0.0)).collect();
    let apply = |x: &[Complex64]| {
        let v = DVector::from_column_slice(x);
        let re = &l.generator * v.map(|z| z.re);
        let im = &l.generator * v.map(|z| z.im);
        re.iter().zip(im.iter()).map(|(a, b)| c(*a, *b)).collect::<Vec<_>>()
    };
    let t_end = 50.0 / slowest_decay(&l.generator);
    let norm = l.generator.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let steps = (t_end * norm / 0.05).ceil() as usize;

    let grid = FrequencyGrid::symmetric(2.0, 5);
    let spec = sol.spectrum(Channel::FluorCentral, &grid).unwrap();
    let obs: Vec<f64> = r3.iter().copied().collect();
    for (nu, value) in spec.nu.iter().zip(&spec.values) {
        let x = laplace_by_stepping(apply, &z0, c(0.0, *nu), t_end, steps);
        let tr: Complex64 = obs.iter().zip(&x).map(|(o, xv)| xv * *o).sum();
        let expect = 0.25 * f.gamma0 * tr.re;
        assert!((value - expect).abs() <= 1e-6 * expect.abs(), "nu = {nu}: {value} vs {expect}");
    }
    // Decoupled limit: Lorentzian centred at zero.
    assert!(spec.values[2] > spec.values[1] && spec.values[1] > spec.values[0]);
}
