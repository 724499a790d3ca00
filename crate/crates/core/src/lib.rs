//! Single-atom dressed-state laser in a photonic band-gap reservoir.
//!
//! The atom is strongly driven and dressed by the laser, the cavity is tuned
//! to the lower Rabi sideband and the reservoir density at the three dressed
//! transition frequencies is either open or closed. From the resulting
//! reduced master equation the crate computes steady states, photon
//! statistics, the cavity output spectrum and the fluorescence spectrum near
//! the lower sideband.
//!
//! Two independent paths are provided: [`engine`] solves the block-tridiagonal
//! recurrence for the Hermitian combinations of density-matrix elements, and
//! [`oracle`] builds the dense Liouvillian on the truncated atom x Fock space.
//! [`ladder`] holds the analytic entangled-ladder model used to label peaks.
//!
//! ```no_run
//! use dressed_laser::{params::{BandFlags, ModelConfig}, Model, SolverOptions};
//!
//! let cfg = ModelConfig::with_cos2_phi(1.0, 0.05, 5.0, 0.05, BandFlags::OPEN);
//! let model = Model::solve(&cfg, &SolverOptions::default()).unwrap();
//! let s = model.cavity_spectrum(&cfg.grid).unwrap();
//! println!("{} peaks", dressed_laser::spectra::find_peaks(&s, 0.01).len());
//! ```

pub mod cli;
pub mod engine;
pub mod error;
pub mod ladder;
pub mod model;
pub mod oracle;
pub mod params;
pub mod spectra;

pub use engine::{Backend, BlockTridiagonalGenerator, BlockVector, SolverOptions};
pub use error::{Error, Result};
pub use model::Model;
pub use params::{BandFlags, DressedFrame, FrequencyGrid, ModelConfig, Truncation};
pub use spectra::{PhotonStatistics, Spectrum, SpectrumKind};
