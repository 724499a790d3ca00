//! Physical configuration and the dressed-frame parameters derived from it.
//!
//! The driven atom is diagonalized in the classical laser field first; every
//! rate the rest of the crate uses (effective cavity coupling, the three
//! band-gap filtered damping rates and the coherence decay rate) is a function
//! of the mixing angle `phi` and the reservoir step-function values only.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Step-function values of the reservoir density at the three dressed-atom
/// transition frequencies (laser frequency, upper and lower Rabi sidebands).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandFlags {
    pub central: bool,
    pub plus: bool,
    pub minus: bool,
}

impl BandFlags {
    pub const OPEN: BandFlags = BandFlags { central: true, plus: true, minus: true };
    /// Band edge between the lower sideband and the laser line: emission at
    /// the cavity frequency is forbidden.
    pub const LOWER_GAP: BandFlags = BandFlags { central: true, plus: true, minus: false };
}

impl Default for BandFlags {
    fn default() -> Self {
        BandFlags::OPEN
    }
}

fn unit(flag: bool) -> f64 {
    if flag {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Fock-space cutoff: photon numbers `0..=n_max`.
    Fixed(usize),
    /// Grow the cutoff until the top steady-state population drops below
    /// `tail_eps`, never beyond `cap`.
    Adaptive { tail_eps: f64, cap: usize },
}

impl Truncation {
    pub const DEFAULT_TAIL_EPS: f64 = 1e-12;
    pub const DEFAULT_CAP: usize = 4096;

    pub fn adaptive() -> Self {
        Truncation::Adaptive { tail_eps: Self::DEFAULT_TAIL_EPS, cap: Self::DEFAULT_CAP }
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::adaptive()
    }
}

/// Uniform grid of frequency offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub nu_min: f64,
    pub nu_max: f64,
    pub points: usize,
}

impl FrequencyGrid {
    pub fn new(nu_min: f64, nu_max: f64, points: usize) -> Self {
        FrequencyGrid { nu_min, nu_max, points }
    }

    /// `[-half_width, half_width]` with `points` samples.
    pub fn symmetric(half_width: f64, points: usize) -> Self {
        FrequencyGrid::new(-half_width, half_width, points)
    }

    /// Default span `[-3g, 3g]` with 2001 points.
    pub fn default_for_coupling(g: f64) -> Self {
        FrequencyGrid::symmetric(3.0 * g, 2001)
    }

    pub fn spacing(&self) -> f64 {
        (self.nu_max - self.nu_min) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.spacing();
        let last = self.points - 1;
        (0..self.points).map(|i| if i == last { self.nu_max } else { self.nu_min + h * i as f64 }).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu_min.is_finite() && self.nu_max.is_finite()) {
            return Err(Error::config("grid", "bounds must be finite"));
        }
        if self.nu_min >= self.nu_max {
            return Err(Error::config("grid.nu_min", "nu_min must be below nu_max"));
        }
        if self.points < 2 {
            return Err(Error::config("grid.points", "at least 2 points required"));
        }
        Ok(())
    }

    /// Same grid with both bounds multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        FrequencyGrid::new(self.nu_min * c, self.nu_max * c, self.points)
    }
}

/// User-facing physical and numerical parameters. Rates are in arbitrary
/// frequency units; presets use `gamma = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Bare atomic decay rate.
    pub gamma: f64,
    /// Cavity damping rate.
    pub kappa: f64,
    /// Bare atom-cavity coupling.
    pub g: f64,
    /// Resonant half Rabi frequency of the drive.
    pub omega0: f64,
    /// Atom-laser detuning.
    pub delta_a: f64,
    /// Mixing angle in radians; supersedes `(omega0, delta_a)` when set.
    pub phi_override: Option<f64>,
    pub band: BandFlags,
    pub truncation: Truncation,
    pub grid: FrequencyGrid,
}

impl ModelConfig {
    /// Resonant drive, open reservoir, adaptive truncation and the default grid.
    pub fn new(gamma: f64, kappa: f64, g: f64, omega0: f64, delta_a: f64) -> Self {
        ModelConfig {
            gamma,
            kappa,
            g,
            omega0,
            delta_a,
            phi_override: None,
            band: BandFlags::OPEN,
            truncation: Truncation::adaptive(),
            grid: FrequencyGrid::default_for_coupling(g),
        }
    }

    /// Configuration pinned by `cos^2(phi)` with the given drive scale `omega0`.
    pub fn with_cos2_phi(gamma: f64, kappa: f64, g: f64, cos2_phi: f64, band: BandFlags) -> Self {
        let mut cfg = ModelConfig::new(gamma, kappa, g, DEFAULT_OMEGA0 * gamma, 0.0);
        cfg.phi_override = Some(cos2_phi.sqrt().acos());
        cfg.band = band;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, "must be finite"))
            }
        };
        finite("gamma", self.gamma)?;
        finite("kappa", self.kappa)?;
        finite("g", self.g)?;
        finite("omega0", self.omega0)?;
        finite("delta_a", self.delta_a)?;
        if self.gamma <= 0.0 {
            return Err(Error::config("gamma", "must be > 0"));
        }
        if self.kappa < 0.0 {
            return Err(Error::config("kappa", "must be >= 0"));
        }
        if self.g <= 0.0 {
            return Err(Error::config("g", "must be > 0"));
        }
        match self.phi_override {
            Some(phi) => {
                if !(phi > 0.0 && phi < FRAC_PI_2) {
                    return Err(Error::config("phi", "must lie in the open interval (0, pi/2)"));
                }
                if self.omega0 < 0.0 {
                    return Err(Error::config("omega0", "must be >= 0"));
                }
            }
            None => {
                if self.omega0 <= 0.0 {
                    return Err(Error::config("omega0", "must be > 0 unless phi is given"));
                }
            }
        }
        match self.truncation {
            Truncation::Fixed(n) if n < 1 => {
                return Err(Error::config("n_max", "must be >= 1"));
            }
            Truncation::Adaptive { tail_eps, cap } => {
                if !(tail_eps > 0.0 && tail_eps < 1.0) {
                    return Err(Error::config("tail_eps", "must lie in (0, 1)"));
                }
                if cap < 8 {
                    return Err(Error::config("cap", "must be >= 8"));
                }
            }
            _ => {}
        }
        self.grid.validate()
    }
}

/// Drive scale used by presets that pin `phi` directly (keeps `2*Omega` well
/// above the default coupling `g = 5`).
pub const DEFAULT_OMEGA0: f64 = 20.0;

/// Dressed-picture quantities consumed by the engine, oracle and ladder model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedFrame {
    pub phi: f64,
    /// Half the generalized Rabi frequency: `2*Omega = sqrt(4*omega0^2 + delta_a^2)`.
    pub big_omega: f64,
    /// Effective coupling `g * sin^2(phi)`.
    pub g1: f64,
    /// Dephasing rate at the laser frequency.
    pub gamma0: f64,
    /// Incoherent pump rate (upper sideband emission).
    pub gamma_plus: f64,
    /// Spontaneous rate at the lower sideband (the cavity frequency).
    pub gamma_minus: f64,
    /// Decay rate of the dressed coherence.
    pub coherence_decay: f64,
}

impl DressedFrame {
    /// Frame built directly from rates, bypassing the mixing-angle formulas.
    /// Used by tests and by limits that need e.g. `g1 -> 0` independently.
    pub fn from_rates(g1: f64, gamma0: f64, gamma_plus: f64, gamma_minus: f64) -> Self {
        DressedFrame {
            phi: f64::NAN,
            big_omega: f64::NAN,
            g1,
            gamma0,
            gamma_plus,
            gamma_minus,
            coherence_decay: 0.5 * (gamma0 + gamma_plus + gamma_minus),
        }
    }

    pub fn cos2_phi(&self) -> f64 {
        self.phi.cos().powi(2)
    }

    /// Largest rate in the frame (used for stepping and shift heuristics).
    pub fn max_rate(&self) -> f64 {
        self.g1.abs().max(self.gamma0).max(self.gamma_plus).max(self.gamma_minus)
    }

    /// Every rate and frequency multiplied by `c`; `phi` unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        DressedFrame {
            phi: self.phi,
            big_omega: self.big_omega * c,
            g1: self.g1 * c,
            gamma0: self.gamma0 * c,
            gamma_plus: self.gamma_plus * c,
            gamma_minus: self.gamma_minus * c,
            coherence_decay: self.coherence_decay * c,
        }
    }
}

/// Mixing angle from `cos^2(phi) = (1 + delta_a / (2 Omega)) / 2`.
pub fn mixing_angle(omega0: f64, delta_a: f64) -> (f64, f64) {
    let two_omega = (4.0 * omega0 * omega0 + delta_a * delta_a).sqrt();
    let cos2 = 0.5 * (1.0 + delta_a / two_omega);
    (cos2.sqrt().acos(), 0.5 * two_omega)
}

pub fn derive_dressed(config: &ModelConfig) -> Result<DressedFrame> {
    config.validate()?;
    let (phi, big_omega) = match config.phi_override {
        Some(phi) => (phi, config.omega0 / (2.0 * phi).sin()),
        None => mixing_angle(config.omega0, config.delta_a),
    };
    let (s, c) = phi.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let gamma = config.gamma;
    let gamma0 = gamma * (2.0 * phi).sin().powi(2) * unit(config.band.central);
    let gamma_plus = gamma * c2 * c2 * unit(config.band.plus);
    let gamma_minus = gamma * s2 * s2 * unit(config.band.minus);
    Ok(DressedFrame {
        phi,
        big_omega,
        g1: config.g * s2,
        gamma0,
        gamma_plus,
        gamma_minus,
        coherence_decay: 0.5 * (gamma0 + gamma_plus + gamma_minus),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegimeWarning {
    /// `2 Omega < 10 max(g, gamma, kappa)`: dropping the terms oscillating at
    /// `2 Omega` and `4 Omega` is questionable.
    RotatingWave { two_omega: f64, scale: f64 },
    /// `g <= max(kappa, gamma)`: outside the good-cavity limit.
    GoodCavity { g: f64, loss: f64 },
}

impl std::fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeWarning::RotatingWave { two_omega, scale } => write!(
                f,
                "2*Omega = {two_omega:.4} is below 10 x max(g, gamma, kappa) = {:.4}; sideband separation is questionable",
                10.0 * scale
            ),
            RegimeWarning::GoodCavity { g, loss } => write!(
                f,
                "g = {g:.4} does not exceed max(kappa, gamma) = {loss:.4}; not in the good-cavity limit"
            ),
        }
    }
}

pub fn validate_regime(config: &ModelConfig, frame: &DressedFrame) -> Vec<RegimeWarning> {
    let mut warnings = Vec::new();
    let two_omega = 2.0 * frame.big_omega;
    let scale = config.g.max(config.gamma).max(config.kappa);
    if !(two_omega >= 10.0 * scale) {
        warnings.push(RegimeWarning::RotatingWave { two_omega, scale });
    }
    let loss = config.kappa.max(config.gamma);
    if config.g <= loss {
        warnings.push(RegimeWarning::GoodCavity { g: config.g, loss });
    }
    warnings
}
