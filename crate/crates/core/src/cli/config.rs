//! JSON run configuration and the built-in presets.
//!
//! ```json
//! {
//!   "preset": "fig-low-pump",
//!   "model": { "kappa": 0.05, "cos2_phi": 0.2, "band": { "central": true, "plus": true, "minus": false } },
//!   "numerics": { "n_max": 16, "grid": { "nu_min": -15, "nu_max": 15, "points": 2001 } },
//!   "output": { "dir": "out", "oracle": false }
//! }
//! ```
//! Every section and key is optional; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::engine::{Backend, SolverOptions};
use crate::error::{Error, Result};
use crate::params::{BandFlags, FrequencyGrid, ModelConfig, Truncation, DEFAULT_OMEGA0};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub g: Option<f64>,
    pub omega0: Option<f64>,
    pub delta_a: Option<f64>,
    pub phi: Option<f64>,
    pub cos2_phi: Option<f64>,
    pub band: Option<BandFlags>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub n_max: Option<usize>,
    pub tail_eps: Option<f64>,
    pub cap: Option<usize>,
    pub backend: Option<Backend>,
    pub residual_tol: Option<f64>,
    pub grid: Option<FrequencyGrid>,
    pub ladder_count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub oracle: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Option<String>,
    /// What regime the preset stands for and how phi was chosen.
    pub interpretation: Option<String>,
    pub model: ModelConfig,
    pub options: SolverOptions,
    pub ladder_count: Option<usize>,
    /// The grid follows `g` unless set explicitly.
    pub grid_explicit: bool,
    pub output_dir: Option<PathBuf>,
    pub oracle: bool,
}

pub struct Preset {
    pub name: &'static str,
    pub cos2_phi: f64,
    pub band: BandFlags,
    pub description: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig-low-pump",
        cos2_phi: 0.05,
        band: BandFlags::OPEN,
        description: "open reservoir, weak pump: vacuum Rabi doublet at +-g1",
    },
    Preset {
        name: "fig-rising-pump",
        cos2_phi: 0.3,
        band: BandFlags::OPEN,
        description: "open reservoir, pump rising: satellite lines appear",
    },
    Preset {
        name: "fig-moderate-pump",
        cos2_phi: 0.5,
        band: BandFlags::OPEN,
        description: "open reservoir, resonant drive: multi-peak cavity spectrum inside the doublet",
    },
    Preset {
        name: "fig-high-pump",
        cos2_phi: 0.9,
        band: BandFlags::OPEN,
        description: "open reservoir, strong pump: single narrow line at the cavity frequency",
    },
    Preset {
        name: "fig-bandgap-low",
        cos2_phi: 0.05,
        band: BandFlags::LOWER_GAP,
        description: "lower sideband in the gap, weak pump: multi-peak already",
    },
    Preset {
        name: "fig-bandgap-moderate",
        cos2_phi: 0.1,
        band: BandFlags::LOWER_GAP,
        description: "lower sideband in the gap, moderate pump: resolved inner sidebands",
    },
    Preset {
        name: "fig-bandgap-high",
        cos2_phi: 0.9,
        band: BandFlags::LOWER_GAP,
        description: "lower sideband in the gap, strong pump: single narrow line",
    },
];

pub fn find_preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        Error::config("preset", format!("unknown preset `{name}` (known: {})", names.join(", ")))
    })
}

fn preset_interpretation(p: &Preset) -> String {
    format!(
        "{}; phi pinned by cos^2(phi) = {} with omega0 = {} gamma, gamma = 1, kappa = 0.05, g = 5",
        p.description, p.cos2_phi, DEFAULT_OMEGA0
    )
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<ConfigFile> {
        serde_json::from_str(text).map_err(|e| Error::config(json_field(&e), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        ConfigFile::from_json(&text)
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let (mut model, interpretation) = match &self.preset {
            Some(name) => {
                let p = find_preset(name)?;
                (ModelConfig::with_cos2_phi(1.0, 0.05, 5.0, p.cos2_phi, p.band), Some(preset_interpretation(p)))
            }
            None => (ModelConfig::new(1.0, 0.05, 5.0, DEFAULT_OMEGA0, 0.0), None),
        };
        let m = &self.model;
        model.gamma = m.gamma.unwrap_or(model.gamma);
        model.kappa = m.kappa.unwrap_or(model.kappa);
        model.g = m.g.unwrap_or(model.g);
        model.omega0 = m.omega0.unwrap_or(model.omega0);
        if let Some(d) = m.delta_a {
            model.delta_a = d;
            model.phi_override = None;
        }
        match (m.phi, m.cos2_phi) {
            (Some(_), Some(_)) => return Err(Error::config("phi", "give either phi or cos2_phi, not both")),
            (Some(phi), None) => model.phi_override = Some(phi),
            (None, Some(c2)) => {
                if !(c2 > 0.0 && c2 < 1.0) {
                    return Err(Error::config("cos2_phi", "must lie in (0, 1)"));
                }
                model.phi_override = Some(c2.sqrt().acos());
            }
            (None, None) => {}
        }
        if let Some(b) = m.band {
            model.band = b;
        }

        let n = &self.numerics;
        model.truncation = match (n.n_max, n.tail_eps, n.cap) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::config("n_max", "fixed n_max excludes tail_eps and cap"))
            }
            (Some(n_max), None, None) => Truncation::Fixed(n_max),
            (None, eps, cap) => Truncation::Adaptive {
                tail_eps: eps.unwrap_or(Truncation::DEFAULT_TAIL_EPS),
                cap: cap.unwrap_or(Truncation::DEFAULT_CAP),
            },
        };
        let grid_explicit = n.grid.is_some();
        model.grid = n.grid.unwrap_or_else(|| FrequencyGrid::default_for_coupling(model.g));

        let mut options = SolverOptions::default();
        if let Some(b) = n.backend {
            options.backend = b;
        }
        if let Some(tol) = n.residual_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::config("residual_tol", "must lie in (0, 1)"));
            }
            options.residual_tol = tol;
        }
        if n.ladder_count == Some(0) {
            return Err(Error::config("ladder_count", "must be >= 1"));
        }
        model.validate()?;
        Ok(RunConfig {
            preset: self.preset.clone(),
            interpretation,
            model,
            options,
            ladder_count: n.ladder_count,
            grid_explicit,
            output_dir: self.output.dir.clone(),
            oracle: self.output.oracle.unwrap_or(false),
        })
    }
}

/// Best-effort name of the offending key in a serde error message.
fn json_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for marker in ["unknown field `", "missing field `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "config".into()
}

/// `config.json` or `preset:NAME`.
pub fn load_run_config(spec: &str) -> Result<RunConfig> {
    match spec.strip_prefix("preset:") {
        Some(name) => ConfigFile { preset: Some(name.to_string()), ..Default::default() }.resolve(),
        None => ConfigFile::load(Path::new(spec))?.resolve(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    DeltaA,
    Phi,
    /// `cos^4(phi)`, the pump rate in units of `gamma`.
    GammaPlusScale,
    Kappa,
    G,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "delta_a" => SweepAxis::DeltaA,
            "phi" => SweepAxis::Phi,
            "gamma_plus_scale" => SweepAxis::GammaPlusScale,
            "kappa" => SweepAxis::Kappa,
            "g" => SweepAxis::G,
            _ => {
                return Err(Error::config(
                    "axis",
                    format!("unknown axis `{s}` (delta_a, phi, gamma_plus_scale, kappa, g)"),
                ))
            }
        })
    }
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::DeltaA => "delta_a",
            SweepAxis::Phi => "phi",
            SweepAxis::GammaPlusScale => "gamma_plus_scale",
            SweepAxis::Kappa => "kappa",
            SweepAxis::G => "g",
        }
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(&self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        if !value.is_finite() {
            return Err(Error::config("values", "sweep values must be finite"));
        }
        let mut cfg = base.clone();
        let m = &mut cfg.model;
        match self {
            SweepAxis::DeltaA => {
                m.delta_a = value;
                m.phi_override = None;
            }
            SweepAxis::Phi => m.phi_override = Some(value),
            SweepAxis::GammaPlusScale => {
                if !(value > 0.0 && value < 1.0) {
                    return Err(Error::config("gamma_plus_scale", "must lie in (0, 1)"));
                }
                m.phi_override = Some(value.powf(0.25).acos());
            }
            SweepAxis::Kappa => m.kappa = value,
            SweepAxis::G => {
                m.g = value;
                if !cfg.grid_explicit {
                    m.grid = FrequencyGrid::default_for_coupling(value);
                }
            }
        }
        cfg.model.validate()?;
        Ok(cfg)
    }
}

pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::config("values", format!("`{s}` is not a number"))))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::config("values", "at least one value is required"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("values", "sweep values must be finite"));
    }
    Ok(values)
}
