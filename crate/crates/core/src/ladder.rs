//! Entangled dressed-atom + cavity ladder.
//!
//! In the secular limit the states `|Psi_{+-n}> = (|2,n> +- |1,n-1>)/sqrt(2)`
//! diagonalize the system; transitions between neighbouring doublets give
//! lines at `+-nu_n^(-+) = +-(sqrt(n+1) -+ sqrt(n)) g1` around the cavity
//! frequency, and the doublet populations follow a one-step recurrence.

use serde::{Deserialize, Serialize};

use crate::engine::BlockVector;
use crate::error::{Error, Result};
use crate::params::DressedFrame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderState {
    /// Signed doublet label: `0` for the singlet, `+-n` otherwise.
    pub label: i64,
    /// Amplitude on `|2, n>`.
    pub upper: f64,
    /// Amplitude on `|1, n - 1>`.
    pub lower: f64,
    /// Energy relative to `N omega_L` (units of frequency).
    pub energy_offset: f64,
}

/// States and energies of rung `n`: the singlet for `n = 0`, the doublet
/// `(-n, +n)` otherwise.
pub fn eigensystem(frame: &DressedFrame, n: usize) -> Vec<LadderState> {
    let big_omega = frame.big_omega;
    if n == 0 {
        return vec![LadderState { label: 0, upper: 1.0, lower: 0.0, energy_offset: big_omega }];
    }
    let base = -((2 * n - 1) as f64) * big_omega;
    let split = frame.g1 * (n as f64).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [-1.0, 1.0]
        .iter()
        .map(|&sign| LadderState {
            label: sign as i64 * n as i64,
            upper: h,
            lower: sign * h,
            energy_offset: base + sign * split,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPeak {
    pub nu: f64,
    pub kind: Sideband,
    pub n: usize,
    /// Spontaneous rate of the pump transitions `n -> n+1`.
    pub pump_rate: f64,
    /// Spontaneous rate of the lower-sideband transitions `n+1 -> n`.
    pub decay_rate: f64,
    /// Cavity-loss rate of the `n+1 -> n` transitions.
    pub cavity_rate: f64,
    /// Advisory stick weight (population x rate); not a fitted intensity.
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPrediction {
    pub peaks: Vec<LadderPeak>,
    /// `Pi_0, Pi_1, ...`, with `Pi_{-n} = Pi_n`; `None` if not normalizable.
    pub populations: Option<Vec<f64>>,
    pub frame: DressedFrame,
    pub kappa: f64,
}

/// `(sqrt(n+1) - sqrt(n)) g1`, `(sqrt(n+1) + sqrt(n)) g1`.
pub fn sideband_offsets(g1: f64, n: usize) -> (f64, f64) {
    let (a, b) = (((n + 1) as f64).sqrt(), (n as f64).sqrt());
    ((a - b) * g1, (a + b) * g1)
}

pub fn peak_table(frame: &DressedFrame, kappa: f64, n_count: usize) -> Result<LadderPrediction> {
    if n_count < 1 {
        return Err(Error::config("n_count", "must be >= 1"));
    }
    let populations = ladder_populations(frame, kappa, n_count + 1).ok();
    let mut peaks = Vec::with_capacity(4 * n_count);
    for n in 0..n_count {
        let (inner, outer) = sideband_offsets(frame.g1, n);
        let delta = if n == 0 { 2.0 } else { 1.0 };
        let pump_rate = 0.25 * frame.gamma_plus * delta;
        let decay_rate = 0.25 * frame.gamma_minus * delta;
        let (a, b) = (((n + 1) as f64).sqrt(), (n as f64).sqrt());
        for (kind, offset, cavity_rate) in [
            (Sideband::Inner, inner, 0.25 * kappa * (a + b).powi(2)),
            (Sideband::Outer, outer, 0.25 * kappa * (a - b).powi(2)),
        ] {
            let weight = populations.as_ref().map(|p| p[n + 1] * (decay_rate + cavity_rate) + p[n] * pump_rate);
            for sign in [-1.0, 1.0] {
                peaks.push(LadderPeak { nu: sign * offset, kind, n, pump_rate, decay_rate, cavity_rate, weight });
            }
        }
    }
    peaks.sort_by(|x, y| x.nu.total_cmp(&y.nu));
    Ok(LadderPrediction { peaks, populations, frame: *frame, kappa })
}

/// Left-hand side of the population balance for rung `n >= 1`, plus the
/// ground-rung condition for `n = 0`.
pub fn recurrence_residual(frame: &DressedFrame, kappa: f64, pops: &[f64], n: usize) -> f64 {
    let (gp, gm) = (frame.gamma_plus, frame.gamma_minus);
    let at = |k: usize| pops.get(k).copied().unwrap_or(0.0);
    if n == 0 {
        return (gm + kappa) * at(1) - gp * at(0);
    }
    let nf = n as f64;
    gp * at(n - 1) - (gp + gm + (2.0 * nf - 1.0) * kappa) * at(n) + (gm + (2.0 * nf + 1.0) * kappa) * at(n + 1)
}

/// `Pi_n = Pi_0 prod_{m<=n} gamma_+ / (gamma_- + (2m-1) kappa)` for
/// `n = 0..n_count`, normalized by `Pi_0 + 2 sum_{n>=1} Pi_n = 1`.
pub fn ladder_populations(frame: &DressedFrame, kappa: f64, n_count: usize) -> Result<Vec<f64>> {
    if n_count < 1 {
        return Err(Error::config("n_count", "must be >= 1"));
    }
    let (gp, gm) = (frame.gamma_plus, frame.gamma_minus);
    let mut pops = vec![0.0; n_count];
    pops[0] = 1.0;
    if gp == 0.0 {
        return Ok(pops);
    }
    if !(gm + kappa > 0.0) {
        return Err(Error::NonNormalizable("gamma_- + kappa must be > 0".into()));
    }
    let mut last_ratio = 0.0;
    for m in 1..n_count {
        last_ratio = gp / (gm + (2 * m - 1) as f64 * kappa);
        pops[m] = pops[m - 1] * last_ratio;
    }
    // Next ratio decides whether the truncated sum is a valid stand-in.
    let next_ratio = gp / (gm + (2 * n_count - 1) as f64 * kappa);
    if n_count > 1 && last_ratio >= 1.0 && next_ratio >= 1.0 {
        return Err(Error::NonNormalizable(format!("population ratio {next_ratio:.4} >= 1 at n = {n_count}")));
    }
    let norm = pops[0] + 2.0 * pops[1..].iter().sum::<f64>();
    if !norm.is_finite() {
        return Err(Error::NonNormalizable("population sum overflows".into()));
    }
    pops.iter_mut().for_each(|p| *p /= norm);

    let scale = gp + gm + (2 * n_count + 1) as f64 * kappa;
    for n in 0..n_count - 1 {
        let r = recurrence_residual(frame, kappa, &pops, n);
        let size = scale * pops[n].max(pops[n + 1]).max(if n > 0 { pops[n - 1] } else { 0.0 });
        if r.abs() > 1e-12 * size.max(f64::MIN_POSITIVE) {
            return Err(Error::NonNormalizable(format!("population balance residual {r:e} at n = {n}")));
        }
    }
    Ok(pops)
}

/// Doublet populations projected from a numerical steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPopulations {
    pub pi0: f64,
    /// `plus[k] = Pi_{+(k+1)}`.
    pub plus: Vec<f64>,
    /// `minus[k] = Pi_{-(k+1)}`.
    pub minus: Vec<f64>,
}

impl ProjectedPopulations {
    pub fn total(&self) -> f64 {
        self.pi0 + self.plus.iter().sum::<f64>() + self.minus.iter().sum::<f64>()
    }

    /// `Pi_{+n}` for `n >= 1`, `Pi_0` for `n = 0`.
    pub fn plus_at(&self, n: usize) -> f64 {
        if n == 0 {
            self.pi0
        } else {
            self.plus.get(n - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn minus_at(&self, n: usize) -> f64 {
        if n == 0 {
            self.pi0
        } else {
            self.minus.get(n - 1).copied().unwrap_or(0.0)
        }
    }
}

/// `Pi_{+-n} = (rho22_{n,n} + rho11_{n-1,n-1})/2 +- Re <2,n|rho|1,n-1>`, where the
/// coherence is `rho^(3)_{n,n} / sqrt(n)`.
pub fn ladder_populations_numeric(steady: &BlockVector) -> ProjectedPopulations {
    let len = steady.len();
    let z = |n: usize, k: usize| steady.get(n, k).re;
    let upper = |n: usize| 0.5 * (z(n, 0) + z(n, 1));
    let lower = |n: usize| 0.5 * (z(n, 0) - z(n, 1));
    let mut plus = Vec::with_capacity(len);
    let mut minus = Vec::with_capacity(len);
    for n in 1..=len {
        let diag = 0.5 * (upper(n) + lower(n - 1));
        let cross = z(n, 2) / (n as f64).sqrt();
        plus.push(diag + cross);
        minus.push(diag - cross);
    }
    ProjectedPopulations { pi0: upper(0), plus, minus }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(gp: f64, gm: f64) -> DressedFrame {
        let mut f = DressedFrame::from_rates(2.5, 1.0, gp, gm);
        f.big_omega = 20.0;
        f
    }

    #[test]
    fn singlet_and_first_doublet() {
        let f = frame(0.25, 0.25);
        let s = eigensystem(&f, 0);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].energy_offset, 20.0);
        let d = eigensystem(&f, 1);
        assert!((d[1].energy_offset - d[0].energy_offset - 2.0 * f.g1).abs() < 1e-14);
        let dot = d[0].upper * d[1].upper + d[0].lower * d[1].lower;
        assert!(dot.abs() < 1e-15);
        for st in &d {
            assert!((st.upper.powi(2) + st.lower.powi(2) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn offsets() {
        let (i0, o0) = sideband_offsets(1.0, 0);
        assert_eq!((i0, o0), (1.0, 1.0));
        let (i1, o1) = sideband_offsets(1.0, 1);
        assert!((i1 - 0.41421356).abs() < 1e-8);
        assert!((o1 - 2.41421356).abs() < 1e-8);
    }

    #[test]
    fn ground_rung_pump_rate_doubles() {
        let f = frame(0.3, 0.1);
        let t = peak_table(&f, 0.05, 3).unwrap();
        let p0 = t.peaks.iter().find(|p| p.n == 0).unwrap();
        assert!((p0.pump_rate - 0.15).abs() < 1e-15);
        let p1 = t.peaks.iter().find(|p| p.n == 1).unwrap();
        assert!((p1.pump_rate - 0.075).abs() < 1e-15);
        assert_eq!(t.peaks.len(), 12);
        assert!(t.peaks.windows(2).all(|w| w[0].nu <= w[1].nu));
    }

    #[test]
    fn closed_form_populations() {
        let p = ladder_populations(&frame(0.0, 0.25), 0.05, 6).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let p = ladder_populations(&frame(0.05, 0.0), 0.05, 40).unwrap();
        let mut dfact = 1.0;
        for n in 1..6 {
            dfact *= (2 * n - 1) as f64;
            assert!((p[n] / p[0] - 1.0 / dfact).abs() < 1e-14);
        }
        let norm = p[0] + 2.0 * p[1..].iter().sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-14);
        let f = frame(0.05, 0.0);
        assert!(recurrence_residual(&f, 0.05, &p, 0).abs() < 1e-16);
    }

    #[test]
    fn unnormalizable() {
        assert!(ladder_populations(&frame(0.5, 0.0), 0.0, 20).is_err());
        assert!(ladder_populations(&frame(0.5, 0.25), 0.0, 20).is_err());
        assert!(ladder_populations(&frame(0.1, 0.25), 0.0, 200).is_ok());
    }
}
