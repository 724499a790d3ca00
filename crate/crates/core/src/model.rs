//! One solved parameter set: truncation, steady state and the sideband-1
//! generator shared by both spectra.

use crate::engine::{
    auto_truncate, build_generator, steady_state, BlockTridiagonalGenerator, BlockVector, SolverOptions,
    TruncationReport,
};
use crate::error::Result;
use crate::ladder::{self, LadderPrediction, ProjectedPopulations};
use crate::params::{derive_dressed, DressedFrame, FrequencyGrid, ModelConfig, Truncation};
use crate::spectra::{self, PhotonStatistics, Spectrum};

#[derive(Debug, Clone)]
pub struct Model {
    pub frame: DressedFrame,
    pub kappa: f64,
    pub truncation: TruncationReport,
    pub steady: BlockVector,
    pub gen_m1: BlockTridiagonalGenerator,
    pub options: SolverOptions,
}

impl Model {
    pub fn solve(config: &ModelConfig, options: &SolverOptions) -> Result<Model> {
        let frame = derive_dressed(config)?;
        Model::from_frame(&frame, config.kappa, config.truncation, options)
    }

    pub fn from_frame(
        frame: &DressedFrame,
        kappa: f64,
        truncation: Truncation,
        options: &SolverOptions,
    ) -> Result<Model> {
        let n_max = match truncation {
            Truncation::Fixed(n) => n,
            Truncation::Adaptive { tail_eps, cap } => auto_truncate(frame, kappa, tail_eps, cap, options)?.n_max,
        };
        let gen_m0 = build_generator(frame, kappa, 0, n_max)?;
        let steady = steady_state(&gen_m0, options)?;
        let gen_m1 = build_generator(frame, kappa, 1, n_max)?;
        let tail_mass = steady.get(n_max, 0).re;
        Ok(Model {
            frame: *frame,
            kappa,
            truncation: TruncationReport { n_max, tail_mass },
            steady,
            gen_m1,
            options: *options,
        })
    }

    pub fn n_max(&self) -> usize {
        self.truncation.n_max
    }

    pub fn statistics(&self) -> PhotonStatistics {
        spectra::photon_statistics(&self.steady)
    }

    /// `<R12 R21>`, the steady population of the lower dressed state.
    pub fn lower_population(&self) -> f64 {
        spectra::lower_population(&self.steady)
    }

    pub fn cavity_spectrum(&self, grid: &FrequencyGrid) -> Result<Spectrum> {
        spectra::cavity_spectrum(&self.steady, &self.gen_m1, grid, &self.options)
    }

    pub fn fluor_lower_spectrum(&self, grid: &FrequencyGrid) -> Result<Spectrum> {
        spectra::fluor_lower_spectrum(&self.steady, &self.gen_m1, grid, &self.options)
    }

    pub fn ladder(&self, n_count: usize) -> Result<LadderPrediction> {
        ladder::peak_table(&self.frame, self.kappa, n_count)
    }

    pub fn projected_populations(&self) -> ProjectedPopulations {
        ladder::ladder_populations_numeric(&self.steady)
    }
}
