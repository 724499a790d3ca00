use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{RunConfig, SweepAxis};
use super::output::{self, read_spectrum_csv, spectrum_csv, to_json, RunManifest, RunWriter};
use crate::error::{Error, Result};
use crate::ladder::{LadderPrediction, ProjectedPopulations, Sideband};
use crate::model::Model;
use crate::oracle::{self, Channel, OracleSolution};
use crate::params::validate_regime;
use crate::spectra::{self, find_peaks, fwhm, PhotonStatistics, Spectrum, SumRule};

/// Relative threshold for reported peaks.
pub const PEAK_THRESHOLD: f64 = 0.01;

/// A peak also matches a ladder line within this fraction of `g1`: overlapping
/// damped lines pull the vacuum Rabi doublet inward by a fraction of a percent.
pub const MATCH_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsReport {
    pub run_id: String,
    pub n_max: usize,
    pub tail_mass: f64,
    pub statistics: PhotonStatistics,
    pub lower_population: f64,
    pub cavity_sum_rule: SumRule,
    pub fluor_lower_sum_rule: SumRule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderReport {
    pub run_id: String,
    pub prediction: LadderPrediction,
    pub projected: ProjectedPopulations,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub run_id: String,
    pub skipped: Option<String>,
    pub max_rel_cavity: Option<f64>,
    pub max_rel_fluor_lower: Option<f64>,
    pub mean_a: Option<f64>,
    pub min_rho_eigenvalue: Option<f64>,
    pub sector_leakage: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub run_id: String,
    pub statistics: PhotonStatistics,
    pub cavity: Spectrum,
    pub fluor_lower: Spectrum,
}

fn max_rel(a: &Spectrum, b: &Spectrum) -> f64 {
    let scale = b.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return a.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs() / y.abs().max(1e-300)).fold(0.0, f64::max)
}

fn default_ladder_count(n_max: usize) -> usize {
    n_max.clamp(4, 64)
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let mut timings = BTreeMap::new();
    let t = Instant::now();
    let model = Model::solve(&cfg.model, &cfg.options)?;
    timings.insert("steady_state".to_string(), t.elapsed().as_secs_f64());

    let run_id = output::run_id(&cfg.model, &serde_json::to_string(&cfg.options)?)?;
    let grid = &cfg.model.grid;

    let t = Instant::now();
    let cavity = model.cavity_spectrum(grid)?;
    timings.insert("cavity_spectrum".to_string(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    let fluor = model.fluor_lower_spectrum(grid)?;
    timings.insert("fluor_lower_spectrum".to_string(), t.elapsed().as_secs_f64());

    let stats = model.statistics();
    let lower = model.lower_population();
    let report = StatsReport {
        run_id: run_id.clone(),
        n_max: model.n_max(),
        tail_mass: model.truncation.tail_mass,
        statistics: stats.clone(),
        lower_population: lower,
        cavity_sum_rule: spectra::cavity_sum_rule(&cavity, &stats),
        fluor_lower_sum_rule: spectra::fluor_sum_rule(&fluor, lower),
    };
    let n_count = cfg.ladder_count.unwrap_or_else(|| default_ladder_count(model.n_max()));
    let mut projected = model.projected_populations();
    projected.plus.truncate(n_count);
    projected.minus.truncate(n_count);
    let ladder = LadderReport { run_id: run_id.clone(), prediction: model.ladder(n_count)?, projected };

    let mut writer = RunWriter::new(out)?;
    writer.write("cavity.csv", &spectrum_csv(&cavity)?)?;
    writer.write("fluor_lower.csv", &spectrum_csv(&fluor)?)?;
    writer.write("stats.json", &to_json(&report)?)?;
    writer.write("ladder.json", &to_json(&ladder)?)?;

    let mut warnings: Vec<String> = validate_regime(&cfg.model, &model.frame).iter().map(|w| w.to_string()).collect();

    if cfg.oracle {
        let t = Instant::now();
        let rep = run_oracle(&model, &cavity, &fluor, &run_id, &mut writer)?;
        timings.insert("oracle".to_string(), t.elapsed().as_secs_f64());
        if let Some(why) = &rep.skipped {
            warnings.push(format!("oracle skipped: {why}"));
        }
        writer.write("oracle_report.json", &to_json(&rep)?)?;
    }

    writer.finish(RunManifest {
        run_id: run_id.clone(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        preset: cfg.preset.clone(),
        interpretation: cfg.interpretation.clone(),
        config: cfg.model.clone(),
        frame: model.frame,
        n_max: model.n_max(),
        tail_mass: model.truncation.tail_mass,
        warnings,
        timings,
        files: BTreeMap::new(),
    })?;
    Ok(RunOutcome { dir: out.to_path_buf(), run_id, statistics: stats, cavity, fluor_lower: fluor })
}

fn run_oracle(
    model: &Model,
    cavity: &Spectrum,
    fluor: &Spectrum,
    run_id: &str,
    writer: &mut RunWriter,
) -> Result<OracleReport> {
    let n_max = model.n_max();
    if n_max > oracle::MAX_N {
        return Ok(OracleReport {
            run_id: run_id.to_string(),
            skipped: Some(format!("n_max = {n_max} exceeds the dense limit {}", oracle::MAX_N)),
            max_rel_cavity: None,
            max_rel_fluor_lower: None,
            mean_a: None,
            min_rho_eigenvalue: None,
            sector_leakage: None,
        });
    }
    let sol = OracleSolution::solve(&model.frame, model.kappa, n_max)?;
    let mean_a = oracle::mean_field(&sol.liouvillian, &sol.rho);
    if mean_a > 1e-8 {
        return Err(Error::SymmetryBroken(format!("|<a>| = {mean_a:e}")));
    }
    let grid = crate::params::FrequencyGrid::new(cavity.nu[0], cavity.nu[cavity.nu.len() - 1], cavity.nu.len());
    let mut rel = BTreeMap::new();
    for ch in Channel::ALL {
        let s = sol.spectrum(ch, &grid)?;
        writer.write(&format!("oracle_{}.csv", ch.kind().as_str()), &spectrum_csv(&s)?)?;
        match ch {
            Channel::Cavity => {
                rel.insert("cavity", max_rel(cavity, &s));
            }
            Channel::FluorLower => {
                rel.insert("fluor_lower", max_rel(fluor, &s));
            }
            _ => {}
        }
    }
    Ok(OracleReport {
        run_id: run_id.to_string(),
        skipped: None,
        max_rel_cavity: rel.get("cavity").copied(),
        max_rel_fluor_lower: rel.get("fluor_lower").copied(),
        mean_a: Some(mean_a),
        min_rho_eigenvalue: Some(oracle::min_eigenvalue(&sol.rho)),
        sector_leakage: Some(oracle::sector_leakage(&sol.rho, n_max)),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub dir: PathBuf,
    pub ok: bool,
    pub error: Option<String>,
    pub mean_n: Option<f64>,
    pub mandel_q: Option<f64>,
    pub cavity_peak_count: Option<usize>,
    pub cavity_peaks: Option<Vec<f64>>,
    pub dominant_peak_nu: Option<f64>,
    pub dominant_fwhm: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub axis: String,
    pub partial_failure: bool,
    pub points: Vec<SweepPoint>,
}

/// One run per value; failing points are recorded and skipped.
pub fn sweep(base: &RunConfig, axis: SweepAxis, values: &[f64], out: &Path) -> Result<SweepSummary> {
    if values.is_empty() {
        return Err(Error::config("values", "at least one value is required"));
    }
    // Resolve every point up front so a malformed value is a config error.
    let configs = values.iter().map(|&v| axis.apply(base, v)).collect::<Result<Vec<_>>>()?;
    let mut points = Vec::with_capacity(values.len());
    let mut first_error = None;
    for (i, (cfg, &value)) in configs.iter().zip(values).enumerate() {
        let dir = out.join(format!("{}_{i:02}", axis.name()));
        match run(cfg, &dir) {
            Ok(o) => {
                let peaks = find_peaks(&o.cavity, PEAK_THRESHOLD);
                let dominant = peaks.iter().max_by(|a, b| a.height.total_cmp(&b.height)).map(|p| p.nu);
                points.push(SweepPoint {
                    value,
                    dir,
                    ok: true,
                    error: None,
                    mean_n: Some(o.statistics.mean_n),
                    mandel_q: Some(o.statistics.mandel_q),
                    cavity_peak_count: Some(peaks.len()),
                    cavity_peaks: Some(peaks.iter().map(|p| p.nu).collect()),
                    dominant_peak_nu: dominant,
                    dominant_fwhm: fwhm(&o.cavity),
                });
            }
            Err(e) => {
                points.push(SweepPoint {
                    value,
                    dir,
                    ok: false,
                    error: Some(e.to_string()),
                    mean_n: None,
                    mandel_q: None,
                    cavity_peak_count: None,
                    cavity_peaks: None,
                    dominant_peak_nu: None,
                    dominant_fwhm: None,
                });
                first_error.get_or_insert(e);
            }
        }
    }
    let failures = points.iter().filter(|p| !p.ok).count();
    if failures == points.len() {
        return Err(first_error.expect("at least one failure"));
    }
    let summary = SweepSummary { axis: axis.name().to_string(), partial_failure: failures > 0, points };
    std::fs::create_dir_all(out)?;
    output::write_atomic(&out.join("summary.json"), to_json(&summary)?.as_bytes())?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeakMatch {
    pub nu: f64,
    pub height: f64,
    pub predicted_nu: f64,
    pub kind: Option<Sideband>,
    pub n: Option<usize>,
    pub label: String,
    /// `(nu - predicted_nu) / grid spacing`.
    pub offset_steps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeaksReport {
    pub run_id: String,
    pub grid_spacing: f64,
    pub matched: Vec<PeakMatch>,
    pub unmatched: Vec<PeakMatch>,
}

fn label(kind: Sideband, n: usize) -> String {
    match (kind, n) {
        (_, 0) => "vacuum Rabi doublet".to_string(),
        (Sideband::Inner, n) => format!("inner sideband n={n}"),
        (Sideband::Outer, n) => format!("outer sideband n={n}"),
    }
}

/// Match detected peaks to the nearest predicted ladder line, within one grid
/// step or [`MATCH_FRACTION`] of `g1`. A peak within one grid step of zero is
/// the merged inner sidebands (lasing line).
pub fn match_peaks(nu: &[f64], values: &[f64], ladder: &LadderPrediction, run_id: &str) -> PeaksReport {
    let h = if nu.len() > 1 { (nu[nu.len() - 1] - nu[0]) / (nu.len() - 1) as f64 } else { 0.0 };
    let s = Spectrum {
        nu: nu.to_vec(),
        values: values.to_vec(),
        kind: crate::spectra::SpectrumKind::Cavity,
        meta: crate::spectra::SpectrumMeta {
            source: "file".into(),
            n_max: 0,
            kappa: ladder.kappa,
            frame: ladder.frame,
        },
    };
    let mut matched = Vec::new();
    let mut unmatched = Vec::new();
    for p in find_peaks(&s, PEAK_THRESHOLD) {
        if p.nu.abs() <= h {
            matched.push(PeakMatch {
                nu: p.nu,
                height: p.height,
                predicted_nu: 0.0,
                kind: Some(Sideband::Inner),
                n: None,
                label: "lasing line".into(),
                offset_steps: p.nu / h,
            });
            continue;
        }
        let best = ladder.peaks.iter().min_by(|a, b| (a.nu - p.nu).abs().total_cmp(&(b.nu - p.nu).abs()));
        let m = match best {
            Some(lp) => PeakMatch {
                nu: p.nu,
                height: p.height,
                predicted_nu: lp.nu,
                kind: Some(lp.kind),
                n: Some(lp.n),
                label: label(lp.kind, lp.n),
                offset_steps: (p.nu - lp.nu) / h,
            },
            None => PeakMatch {
                nu: p.nu,
                height: p.height,
                predicted_nu: f64::NAN,
                kind: None,
                n: None,
                label: "unassigned".into(),
                offset_steps: f64::INFINITY,
            },
        };
        if m.offset_steps.abs() <= 1.0 || (m.nu - m.predicted_nu).abs() <= MATCH_FRACTION * ladder.frame.g1 {
            matched.push(m);
        } else {
            unmatched.push(m);
        }
    }
    PeaksReport { run_id: run_id.to_string(), grid_spacing: h, matched, unmatched }
}

/// Both files must be listed, with matching hashes, in the manifest next to
/// the spectrum.
pub fn peaks(spectrum_csv_path: &Path, ladder_json_path: &Path) -> Result<PeaksReport> {
    let dir = spectrum_csv_path.parent().unwrap_or_else(|| Path::new("."));
    let manifest = RunManifest::load(&dir.join(output::MANIFEST))?;
    let check = |path: &Path| -> Result<()> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::config("peaks", format!("cannot read {}: {e}", path.display())))?;
        let hash = output::sha256_hex(&bytes);
        if !manifest.files.values().any(|h| *h == hash) {
            return Err(Error::ManifestMismatch(format!("{} is not part of run {}", path.display(), manifest.run_id)));
        }
        Ok(())
    };
    check(spectrum_csv_path)?;
    check(ladder_json_path)?;
    let text = std::fs::read_to_string(ladder_json_path)?;
    let ladder: LadderReport = serde_json::from_str(&text)
        .map_err(|e| Error::config("ladder", format!("{}: {e}", ladder_json_path.display())))?;
    if ladder.run_id != manifest.run_id {
        return Err(Error::ManifestMismatch(format!(
            "ladder run {} differs from manifest run {}",
            ladder.run_id, manifest.run_id
        )));
    }
    let (nu, values) = read_spectrum_csv(spectrum_csv_path)?;
    Ok(match_peaks(&nu, &values, &ladder.prediction, &manifest.run_id))
}
