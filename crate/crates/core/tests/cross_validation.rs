//! Recurrence engine against the dense Liouvillian at a shared cutoff.

mod common;

use common::*;
use dressed_laser::engine::{apply_generator, build_generator, steady_state};
use dressed_laser::oracle::{build_liouvillian, project_blocks, Channel, OracleSolution};
use dressed_laser::params::{BandFlags, FrequencyGrid, Truncation};
use dressed_laser::spectra::{regression_seed_cavity, regression_seed_fluor};
use dressed_laser::{DressedFrame, Model, SolverOptions};
use rand::SeedableRng;

fn frames() -> Vec<DressedFrame> {
    vec![frame(0.6, BandFlags::OPEN), frame(0.3, BandFlags::LOWER_GAP), DressedFrame::from_rates(2.5, 0.7, 0.36, 0.16)]
}

#[test]
fn generator_action_matches_projected_liouvillian() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for f in frames() {
        for n_max in [1, 2, 6] {
            let l = build_liouvillian(&f, KAPPA, n_max).unwrap();
            for m in [0, 1] {
                let gen = build_generator(&f, KAPPA, m, n_max).unwrap();
                for _ in 0..10 {
                    let rho = random_hermitian(&mut rng, l.dim);
                    let lhs = project_blocks(&l.apply(&rho), n_max, m);
                    let rhs = apply_generator(&gen, &project_blocks(&rho, n_max, m)).unwrap();
                    let err = lhs.max_abs_diff(&rhs);
                    assert!(err < 1e-12, "m={m} n_max={n_max} err={err}");
                }
            }
        }
    }
}

#[test]
fn steady_state_and_seeds_match_oracle() {
    for f in frames() {
        let n_max = 8;
        let sol = OracleSolution::solve(&f, KAPPA, n_max).unwrap();
        let gen = build_generator(&f, KAPPA, 0, n_max).unwrap();
        let z = steady_state(&gen, &SolverOptions::default()).unwrap();
        assert!(z.max_abs_diff(&sol.steady_blocks()) < 1e-9);
        let cav = regression_seed_cavity(&z);
        assert!(cav.max_abs_diff(&sol.seed_blocks(Channel::Cavity)) < 1e-10);
        let fl = regression_seed_fluor(&z);
        assert!(fl.max_abs_diff(&sol.seed_blocks(Channel::FluorLower)) < 1e-10);
    }
}

#[test]
fn spectra_match_oracle_pointwise() {
    let grid = FrequencyGrid::symmetric(3.0 * G, 101);
    for f in frames() {
        let model = Model::from_frame(&f, KAPPA, Truncation::Fixed(8), &SolverOptions::default()).unwrap();
        let sol = OracleSolution::solve(&f, KAPPA, 8).unwrap();
        let c = model.cavity_spectrum(&grid).unwrap();
        let oc = sol.spectrum(Channel::Cavity, &grid).unwrap();
        assert!(max_rel(&c.values, &oc.values) < 1e-8, "{}", max_rel(&c.values, &oc.values));
        let s = model.fluor_lower_spectrum(&grid).unwrap();
        let os = sol.spectrum(Channel::FluorLower, &grid).unwrap();
        if f.gamma_minus == 0.0 {
            assert!(s.values.iter().chain(&os.values).all(|v| v.abs() < 1e-12));
        } else {
            assert!(max_rel(&s.values, &os.values) < 1e-8, "{}", max_rel(&s.values, &os.values));
        }
    }
}
