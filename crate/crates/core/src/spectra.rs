//! Cavity and lower-sideband fluorescence spectra via the quantum regression
//! theorem, plus photon statistics and the diagnostics used on spectra
//! (integrals, peaks, widths).
//!
//! Frequencies are offsets `nu = omega - omega_minus` from the lower Rabi
//! sideband, which is also the cavity frequency.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{resolvent_solve, BlockTridiagonalGenerator, BlockVector, SolverOptions};
use crate::error::{Error, Result};
use crate::params::{DressedFrame, FrequencyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Cavity,
    FluorLower,
    FluorCentral,
    FluorUpper,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::Cavity => "cavity",
            SpectrumKind::FluorLower => "fluor_lower",
            SpectrumKind::FluorCentral => "fluor_central",
            SpectrumKind::FluorUpper => "fluor_upper",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    /// `"engine"` or `"oracle"`.
    pub source: String,
    pub n_max: usize,
    pub kappa: f64,
    pub frame: DressedFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub nu: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min(values) / max|values|`; 0 for a spectrum that vanishes identically.
    pub fn min_relative(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        self.values.iter().copied().fold(f64::INFINITY, f64::min) / scale
    }

    pub fn grid_spacing(&self) -> f64 {
        if self.nu.len() < 2 {
            return 0.0;
        }
        (self.nu[self.nu.len() - 1] - self.nu[0]) / (self.nu.len() - 1) as f64
    }

    /// Strictly increasing grid and finite values.
    pub fn check(&self) -> Result<()> {
        if self.nu.len() != self.values.len() {
            return Err(Error::DimensionMismatch { expected: self.nu.len(), got: self.values.len() });
        }
        if self.nu.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("grid", "frequency grid must be strictly increasing"));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{} spectrum at nu = {}", self.kind.as_str(), self.nu[i])));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    pub p_n: Vec<f64>,
    pub mean_n: f64,
    pub mandel_q: f64,
    /// `|<a>|`; zero by the phase symmetry of the model.
    pub mean_a: f64,
}

/// Tolerance below which a negative population is treated as rounding.
pub const POPULATION_TOL: f64 = 1e-10;

pub fn photon_statistics(steady: &BlockVector) -> PhotonStatistics {
    let p_n: Vec<f64> = steady
        .entries
        .iter()
        .map(|v| {
            let p = v[0].re;
            if p < 0.0 && p > -POPULATION_TOL {
                0.0
            } else {
                p
            }
        })
        .collect();
    let (m1, m2) = p_n.iter().enumerate().fold((0.0, 0.0), |(a, b), (n, p)| {
        let n = n as f64;
        (a + n * p, b + n * n * p)
    });
    let mandel_q = if m1 > 1e-300 { (m2 - m1 * m1 - m1) / m1 } else { 0.0 };
    // The m = 0 chain holds only phase-invariant elements, so <a> is zero
    // identically on this path; the dense path measures it.
    PhotonStatistics { p_n, mean_n: m1, mandel_q, mean_a: 0.0 }
}

/// `rho^(3)_{k,k} / sqrt(k)`: the atomic coherence `<2|rho|1>` between Fock
/// `k - 1` and `k` (real for a stationary state).
fn coherence(steady: &BlockVector, k: usize) -> Complex64 {
    if k == 0 || k >= steady.len() {
        Complex64::new(0.0, 0.0)
    } else {
        steady.entries[k][2] / (k as f64).sqrt()
    }
}

/// Total population of the lower dressed level, `<R12 R21>`.
pub fn lower_population(steady: &BlockVector) -> f64 {
    steady.entries.iter().map(|v| 0.5 * (v[0].re - v[1].re)).sum()
}

/// Sideband-1 combinations of `a rho_s`.
pub fn regression_seed_cavity(steady: &BlockVector) -> BlockVector {
    let n_max = steady.len() - 1;
    let entries = (0..n_max)
        .map(|n| {
            let s = ((n + 1) as f64).sqrt();
            nalgebra::Vector4::new(
                steady.entries[n + 1][0] * s,
                steady.entries[n + 1][1] * s,
                coherence(steady, n + 1) * (0.5 * (2 * n + 1) as f64),
                coherence(steady, n + 2) * (((n + 1) * (n + 2)) as f64).sqrt(),
            )
        })
        .collect();
    BlockVector { m: 1, entries }
}

/// Sideband-1 combinations of `R21 rho_s`.
pub fn regression_seed_fluor(steady: &BlockVector) -> BlockVector {
    let n_max = steady.len() - 1;
    let lower = |n: usize| (steady.entries[n][0] - steady.entries[n][1]) * 0.5;
    let entries = (0..n_max)
        .map(|n| {
            let c = coherence(steady, n + 1);
            let s = 0.5 * ((n + 1) as f64).sqrt();
            nalgebra::Vector4::new(c, c, lower(n) * s, lower(n + 1) * s)
        })
        .collect();
    BlockVector { m: 1, entries }
}

fn weighted_sum(x: &BlockVector, k: usize) -> Complex64 {
    x.entries.iter().enumerate().map(|(n, v)| v[k] * ((n + 1) as f64).sqrt()).sum()
}

/// Laplace transform of `<a^dagger(tau) a(0)>` at shift `s`.
pub fn cavity_correlation(
    gen_m1: &BlockTridiagonalGenerator,
    seed: &BlockVector,
    s: Complex64,
    opts: &SolverOptions,
) -> Result<Complex64> {
    let x = resolvent_solve(gen_m1, s, seed, opts)?;
    Ok(weighted_sum(&x, 0))
}

/// Laplace transform of `<R12(tau) R21(0)>` at shift `s`.
pub fn fluor_correlation(
    gen_m1: &BlockTridiagonalGenerator,
    seed: &BlockVector,
    lower_pop: f64,
    s: Complex64,
    opts: &SolverOptions,
) -> Result<Complex64> {
    let f = &gen_m1.frame;
    let x = resolvent_solve(gen_m1, s, seed, opts)?;
    let denom = Complex64::new(f.coherence_decay, 0.0) + s;
    Ok((lower_pop + weighted_sum(&x, 1) * f.g1) / denom)
}

fn meta(gen: &BlockTridiagonalGenerator) -> SpectrumMeta {
    SpectrumMeta { source: "engine".into(), n_max: gen.n_max, kappa: gen.kappa, frame: gen.frame }
}

fn check_pair(steady: &BlockVector, gen_m1: &BlockTridiagonalGenerator) -> Result<()> {
    if gen_m1.m != 1 {
        return Err(Error::config("m", "spectra need the m = 1 generator"));
    }
    if steady.m != 0 || steady.len() != gen_m1.n_max + 1 {
        return Err(Error::DimensionMismatch { expected: gen_m1.n_max + 1, got: steady.len() });
    }
    Ok(())
}

fn finish(kind: SpectrumKind, gen: &BlockTridiagonalGenerator, nu: Vec<f64>, values: Vec<f64>) -> Result<Spectrum> {
    let s = Spectrum { nu, values, kind, meta: meta(gen) };
    s.check()?;
    Ok(s)
}

/// `S_c(nu) = 2 Re sum_n sqrt(n+1) X^(1)_n(-i nu)`.
pub fn cavity_spectrum(
    steady: &BlockVector,
    gen_m1: &BlockTridiagonalGenerator,
    grid: &FrequencyGrid,
    opts: &SolverOptions,
) -> Result<Spectrum> {
    check_pair(steady, gen_m1)?;
    grid.validate()?;
    let seed = regression_seed_cavity(steady);
    let nu = grid.values();
    let values = nu
        .par_iter()
        .map(|&v| cavity_correlation(gen_m1, &seed, Complex64::new(0.0, -v), opts).map(|c| 2.0 * c.re))
        .collect::<Result<Vec<_>>>()?;
    finish(SpectrumKind::Cavity, gen_m1, nu, values)
}

/// `S^(-)(nu) = gamma_- Re <R12 R21>^(s = +i nu)`; zero when `gamma_- = 0`.
pub fn fluor_lower_spectrum(
    steady: &BlockVector,
    gen_m1: &BlockTridiagonalGenerator,
    grid: &FrequencyGrid,
    opts: &SolverOptions,
) -> Result<Spectrum> {
    check_pair(steady, gen_m1)?;
    grid.validate()?;
    let nu = grid.values();
    let gm = gen_m1.frame.gamma_minus;
    if gm == 0.0 {
        let values = vec![0.0; nu.len()];
        return finish(SpectrumKind::FluorLower, gen_m1, nu, values);
    }
    let seed = regression_seed_fluor(steady);
    let pop = lower_population(steady);
    let values = nu
        .par_iter()
        .map(|&v| fluor_correlation(gen_m1, &seed, pop, Complex64::new(0.0, v), opts).map(|c| gm * c.re))
        .collect::<Result<Vec<_>>>()?;
    finish(SpectrumKind::FluorLower, gen_m1, nu, values)
}

/// `lim s->inf s C(s)` for both correlations: the equal-time moments
/// `<a^dagger a>` and `<R12 R21>` recovered from the resolvent.
pub fn correlation_at_zero(
    steady: &BlockVector,
    gen_m1: &BlockTridiagonalGenerator,
    opts: &SolverOptions,
) -> Result<(Complex64, Complex64)> {
    check_pair(steady, gen_m1)?;
    let scale = gen_m1.frame.max_rate().max(gen_m1.kappa).max(1.0);
    let s = Complex64::new(1e12 * scale, 0.0);
    let cav = cavity_correlation(gen_m1, &regression_seed_cavity(steady), s, opts)? * s;
    let fl = fluor_correlation(gen_m1, &regression_seed_fluor(steady), lower_population(steady), s, opts)? * s;
    Ok((cav, fl))
}

pub fn trapezoid(nu: &[f64], values: &[f64]) -> f64 {
    nu.windows(2).zip(values.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Trapezoid rule plus the analytic contribution of `1/nu^2` tails beyond the
/// grid ends, `S(nu_end) |nu_end|`.
pub fn integrate_with_tails(spectrum: &Spectrum) -> f64 {
    let n = spectrum.nu.len();
    let core = trapezoid(&spectrum.nu, &spectrum.values);
    if n < 2 {
        return core;
    }
    let left = spectrum.values[0] * spectrum.nu[0].abs();
    let right = spectrum.values[n - 1] * spectrum.nu[n - 1].abs();
    core + left + right
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRule {
    pub integral: f64,
    pub expected: f64,
    pub rel_err: f64,
}

impl SumRule {
    fn new(integral: f64, expected: f64) -> Self {
        let rel_err = if expected == 0.0 { integral.abs() } else { ((integral - expected) / expected).abs() };
        SumRule { integral, expected, rel_err }
    }
}

/// `int S_c = 2 pi <n>`.
pub fn cavity_sum_rule(spectrum: &Spectrum, stats: &PhotonStatistics) -> SumRule {
    let fluct = stats.mean_n - stats.mean_a * stats.mean_a;
    SumRule::new(integrate_with_tails(spectrum), 2.0 * std::f64::consts::PI * fluct)
}

/// `int S^(-) = pi gamma_- <R12 R21>`.
pub fn fluor_sum_rule(spectrum: &Spectrum, lower_pop: f64) -> SumRule {
    let gm = spectrum.meta.frame.gamma_minus;
    SumRule::new(integrate_with_tails(spectrum), std::f64::consts::PI * gm * lower_pop)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub nu: f64,
    pub height: f64,
    pub index: usize,
}

/// Local maxima above `threshold * max`, refined by the vertex of the
/// parabola through the sample and its two neighbours.
pub fn find_peaks(spectrum: &Spectrum, threshold: f64) -> Vec<Peak> {
    let (nu, s) = (&spectrum.nu, &spectrum.values);
    let max = spectrum.max_value();
    if !(max > 0.0) || s.len() < 3 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for i in 1..s.len() - 1 {
        if !(s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > threshold * max) {
            continue;
        }
        let (y0, y1, y2) = (s[i - 1], s[i], s[i + 1]);
        let curv = y0 - 2.0 * y1 + y2;
        let (shift, height) = if curv < 0.0 {
            let d = 0.5 * (y0 - y2) / curv;
            (d, y1 - 0.25 * (y0 - y2) * d)
        } else {
            (0.0, y1)
        };
        let h = 0.5 * (nu[i + 1] - nu[i - 1]);
        peaks.push(Peak { nu: nu[i] + shift * h, height, index: i });
    }
    peaks
}

/// Full width at half maximum of the global maximum, by linear interpolation
/// at the half-height crossings. `None` if a crossing lies off the grid.
pub fn fwhm(spectrum: &Spectrum) -> Option<f64> {
    let (nu, s) = (&spectrum.nu, &spectrum.values);
    let (imax, &top) = s.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(top > 0.0) {
        return None;
    }
    let half = 0.5 * top;
    let mut j = imax;
    while s[j] > half {
        j = j.checked_sub(1)?;
    }
    let left = nu[j] + (half - s[j]) / (s[j + 1] - s[j]) * (nu[j + 1] - nu[j]);
    let mut k = imax;
    while s[k] > half {
        k += 1;
        if k == s.len() {
            return None;
        }
    }
    let right = nu[k - 1] + (half - s[k - 1]) / (s[k] - s[k - 1]) * (nu[k] - nu[k - 1]);
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentzian(width: f64, center: f64) -> Spectrum {
        let grid = FrequencyGrid::symmetric(10.0, 4001);
        let nu = grid.values();
        let values = nu.iter().map(|v| width / (width * width + (v - center).powi(2))).collect();
        Spectrum {
            nu,
            values,
            kind: SpectrumKind::Cavity,
            meta: SpectrumMeta {
                source: "test".into(),
                n_max: 0,
                kappa: 0.0,
                frame: DressedFrame::from_rates(0.0, 0.0, 0.0, 0.0),
            },
        }
    }

    #[test]
    fn lorentzian_diagnostics() {
        let s = lorentzian(0.3, 0.1234);
        let p = find_peaks(&s, 0.01);
        assert_eq!(p.len(), 1);
        assert!((p[0].nu - 0.1234).abs() < 1e-4, "{}", p[0].nu);
        assert!((fwhm(&s).unwrap() - 0.6).abs() < 1e-4);
        // int = pi; the tail correction recovers most of the 2 * 0.3 / 10 loss
        let plain = trapezoid(&s.nu, &s.values);
        let corrected = integrate_with_tails(&s);
        let pi = std::f64::consts::PI;
        assert!((plain - pi).abs() > 0.05);
        assert!((corrected - pi).abs() < 2e-3, "{corrected}");
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let mut s = lorentzian(1.0, 0.0);
        s.values.iter_mut().for_each(|v| *v = 0.0);
        assert!(find_peaks(&s, 0.01).is_empty());
        assert!(fwhm(&s).is_none());
        assert_eq!(s.min_relative(), 0.0);
    }

    #[test]
    fn check_rejects_bad_grids() {
        let mut s = lorentzian(1.0, 0.0);
        s.values[3] = f64::NAN;
        assert!(matches!(s.check(), Err(Error::NonFinite(_))));
        let mut s = lorentzian(1.0, 0.0);
        s.nu.swap(1, 2);
        assert!(s.check().is_err());
    }

    #[test]
    fn vacuum_statistics() {
        let mut z = BlockVector::zeros(0, 5);
        z.entries[0][0] = Complex64::new(1.0, 0.0);
        z.entries[0][1] = Complex64::new(1.0, 0.0);
        let st = photon_statistics(&z);
        assert_eq!(st.mean_n, 0.0);
        assert_eq!(st.mandel_q, 0.0);
        assert_eq!(st.p_n[0], 1.0);
        assert_eq!(regression_seed_cavity(&z).norm_inf(), 0.0);
        assert_eq!(regression_seed_fluor(&z).norm_inf(), 0.0);
    }

    #[test]
    fn seed_leading_component_is_sqrt_weighted_population() {
        let mut z = BlockVector::zeros(0, 4);
        for (n, p) in [0.5, 0.3, 0.15, 0.05].iter().enumerate() {
            z.entries[n][0] = Complex64::new(*p, 0.0);
        }
        let seed = regression_seed_cavity(&z);
        assert_eq!(seed.len(), 3);
        assert!((seed.get(0, 0).re - 0.3).abs() < 1e-15);
        assert!((seed.get(2, 0).re - 3f64.sqrt() * 0.05).abs() < 1e-15);
    }
}
