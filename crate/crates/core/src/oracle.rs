//! Dense reference implementation on the truncated atom x Fock space.
//!
//! Basis index is `atom * (n_max + 1) + n` with atom 0 = lower dressed state,
//! atom 1 = upper dressed state. Density operators are vectorized column-major,
//! so `vec(X rho Y) = (Y^T kron X) vec(rho)`. Every operator in the model is
//! real, hence so are the generator and the stationary state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::BlockVector;
use crate::error::{Error, Result};
use crate::params::{DressedFrame, FrequencyGrid};
use crate::spectra::{Spectrum, SpectrumKind, SpectrumMeta};

/// Largest Fock cutoff the dense path accepts (`dim^2 = 3844`).
pub const MAX_N: usize = 30;

#[derive(Debug, Clone)]
pub struct Operators {
    pub a: DMatrix<f64>,
    pub r12: DMatrix<f64>,
    pub r21: DMatrix<f64>,
    pub r3: DMatrix<f64>,
}

impl Operators {
    pub fn new(n_max: usize) -> Self {
        let d = n_max + 1;
        let a_f = DMatrix::from_fn(d, d, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
        let eye_f = DMatrix::<f64>::identity(d, d);
        let atomic = |i: usize, j: usize| {
            let mut m = DMatrix::<f64>::zeros(2, 2);
            m[(i, j)] = 1.0;
            m
        };
        let (lo, up) = (0, 1);
        Operators {
            a: DMatrix::<f64>::identity(2, 2).kronecker(&a_f),
            r12: atomic(lo, up).kronecker(&eye_f),
            r21: atomic(up, lo).kronecker(&eye_f),
            r3: (atomic(up, up) - atomic(lo, lo)).kronecker(&eye_f),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FullLiouvillian {
    pub n_max: usize,
    pub dim: usize,
    pub frame: DressedFrame,
    pub kappa: f64,
    pub generator: DMatrix<f64>,
    pub ops: Operators,
}

fn dissipator(x: &DMatrix<f64>) -> DMatrix<f64> {
    let d = x.nrows();
    let eye = DMatrix::<f64>::identity(d, d);
    let p = x.transpose() * x;
    x.kronecker(x) * 2.0 - eye.kronecker(&p) - p.transpose().kronecker(&eye)
}

pub fn build_liouvillian(frame: &DressedFrame, kappa: f64, n_max: usize) -> Result<FullLiouvillian> {
    if n_max < 1 {
        return Err(Error::config("n_max", "must be >= 1"));
    }
    if n_max > MAX_N {
        return Err(Error::config("n_max", format!("dense reference supports n_max <= {MAX_N}")));
    }
    let ops = Operators::new(n_max);
    let dim = 2 * (n_max + 1);
    let eye = DMatrix::<f64>::identity(dim, dim);
    let h = &ops.r12 * &ops.a - ops.a.transpose() * &ops.r21;

    let mut l = (eye.kronecker(&h) - h.transpose().kronecker(&eye)) * frame.g1;
    l += dissipator(&ops.a) * (0.5 * kappa);
    l += dissipator(&ops.r3) * (0.125 * frame.gamma0);
    l += dissipator(&ops.r21) * (0.5 * frame.gamma_minus);
    l += dissipator(&ops.r12) * (0.5 * frame.gamma_plus);
    Ok(FullLiouvillian { n_max, dim, frame: *frame, kappa, generator: l, ops })
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

impl FullLiouvillian {
    /// `L(rho)` through the vectorized generator.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let v = DVector::from_column_slice(rho.as_slice());
        let re = &self.generator * v.map(|z| z.re);
        let im = &self.generator * v.map(|z| z.im);
        let out: Vec<Complex64> = re.iter().zip(im.iter()).map(|(r, i)| Complex64::new(*r, *i)).collect();
        DMatrix::from_column_slice(self.dim, self.dim, &out)
    }

    /// `L(rho)` from the operator form of the master equation, without the
    /// vectorized generator.
    pub fn apply_direct(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let f = &self.frame;
        let a = to_complex(&self.ops.a);
        let r12 = to_complex(&self.ops.r12);
        let r21 = to_complex(&self.ops.r21);
        let r3 = to_complex(&self.ops.r3);
        let h = &r12 * &a - a.adjoint() * &r21;
        let d = |x: &DMatrix<Complex64>| {
            let xd = x.adjoint();
            (x * rho * &xd) * Complex64::new(2.0, 0.0) - &xd * x * rho - rho * &xd * x
        };
        let c = |x: f64| Complex64::new(x, 0.0);
        (&h * rho - rho * &h) * c(f.g1)
            + d(&a) * c(0.5 * self.kappa)
            + (&r3 * rho * &r3 * c(2.0) - &r3 * &r3 * rho - rho * &r3 * &r3) * c(0.125 * f.gamma0)
            + d(&r21) * c(0.5 * f.gamma_minus)
            + d(&r12) * c(0.5 * f.gamma_plus)
    }

    /// All generator eigenvalues.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.generator.clone().complex_eigenvalues().iter().copied().collect()
    }

    fn fock(&self) -> usize {
        self.n_max + 1
    }
}

/// Hermitian-combination blocks of an arbitrary operator at sideband `m`,
/// with the truncated annihilation operator. Blocks `n = 0..=n_max - m`.
pub fn project_blocks(rho: &DMatrix<Complex64>, n_max: usize, m: usize) -> BlockVector {
    let d = n_max + 1;
    let a = DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ad = a.transpose();
    let r11 = rho.view((0, 0), (d, d)).into_owned();
    let r22 = rho.view((d, d), (d, d)).into_owned();
    let r12 = rho.view((0, d), (d, d)).into_owned();
    let r21 = rho.view((d, 0), (d, d)).into_owned();
    let half = Complex64::new(0.5, 0.0);
    let p1 = &r22 + &r11;
    let p2 = &r22 - &r11;
    let p3 = (&r21 * &a + &ad * &r12) * half;
    let p4 = (&a * &r21 + &r12 * &ad) * half;
    let len = d.saturating_sub(m);
    let entries = (0..len)
        .map(|n| nalgebra::Vector4::new(p1[(n, n + m)], p2[(n, n + m)], p3[(n, n + m)], p4[(n, n + m)]))
        .collect();
    BlockVector { m, entries }
}

/// Relative pivot below which the bordered stationary system is declared rank
/// deficient.
const NULL_PIVOT_EPS: f64 = 1e-13;

/// Stationary density operator: the null vector of the generator with unit
/// trace. Returned symmetrized (it is real).
pub fn oracle_steady_state(l: &FullLiouvillian) -> Result<DMatrix<f64>> {
    let dim = l.dim;
    let size = dim * dim;
    let mut m = l.generator.clone();
    // Row 0 is the equation for rho_{00}; the trace functional has unit weight
    // on it, so the remaining rows stay independent.
    m.row_mut(0).fill(0.0);
    for i in 0..dim {
        m[(0, i * dim + i)] = 1.0;
    }
    let mut rhs = DVector::zeros(size);
    rhs[0] = 1.0;
    let lu = m.full_piv_lu();
    let u = lu.u();
    let pivots = (0..size).map(|i| u[(i, i)].abs());
    let (lo, hi) = pivots.fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if !(lo > NULL_PIVOT_EPS * hi) {
        return Err(Error::DegenerateNullSpace(format!("smallest relative pivot {:e}", lo / hi)));
    }
    let x = lu.solve(&rhs).ok_or_else(|| Error::DegenerateNullSpace("bordered system is singular".into()))?;
    let rho = DMatrix::from_column_slice(dim, dim, x.as_slice());
    Ok((&rho + rho.transpose()) * 0.5)
}

pub fn min_eigenvalue(rho: &DMatrix<f64>) -> f64 {
    rho.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Excitation number `n - [atom upper]`, conserved by the master equation.
fn charge(index: usize, fock: usize) -> i64 {
    let (atom, n) = (index / fock, index % fock);
    n as i64 - atom as i64
}

/// Largest element of `rho` between states of different excitation number.
pub fn sector_leakage(rho: &DMatrix<f64>, n_max: usize) -> f64 {
    let fock = n_max + 1;
    let mut worst = 0.0f64;
    for j in 0..rho.ncols() {
        for i in 0..rho.nrows() {
            if charge(i, fock) != charge(j, fock) {
                worst = worst.max(rho[(i, j)].abs());
            }
        }
    }
    worst
}

/// `|<a>| = |Tr[a rho]|`.
pub fn mean_field(l: &FullLiouvillian, rho: &DMatrix<f64>) -> f64 {
    (&l.ops.a * rho).trace().abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// `B = a`, prefactor 2, `s = -i nu`.
    Cavity,
    /// `B = R21`, prefactor `gamma_-`, `s = +i nu`.
    FluorLower,
    /// `B = R3`, prefactor `gamma_0 / 4`, `s = +i nu`.
    FluorCentral,
    /// `B = R12`, prefactor `gamma_+`, `s = +i nu`.
    FluorUpper,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Cavity, Channel::FluorLower, Channel::FluorCentral, Channel::FluorUpper];

    pub fn kind(&self) -> SpectrumKind {
        match self {
            Channel::Cavity => SpectrumKind::Cavity,
            Channel::FluorLower => SpectrumKind::FluorLower,
            Channel::FluorCentral => SpectrumKind::FluorCentral,
            Channel::FluorUpper => SpectrumKind::FluorUpper,
        }
    }

    fn setup<'a>(&self, l: &'a FullLiouvillian) -> (&'a DMatrix<f64>, f64, f64) {
        let f = &l.frame;
        match self {
            Channel::Cavity => (&l.ops.a, 2.0, -1.0),
            Channel::FluorLower => (&l.ops.r21, f.gamma_minus, 1.0),
            Channel::FluorCentral => (&l.ops.r3, 0.25 * f.gamma0, 1.0),
            Channel::FluorUpper => (&l.ops.r12, f.gamma_plus, 1.0),
        }
    }
}

/// Solve `(s I - H) y = b` for upper Hessenberg `H`, eliminating the single
/// subdiagonal with row pivoting between neighbours.
fn hessenberg_solve(h: &DMatrix<f64>, s: Complex64, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    let n = h.nrows();
    // Row-major copy of s I - H; row k holds columns (k - 1)..n.
    let mut rows: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = Complex64::new(-h[(i, j)], 0.0);
                    if i == j {
                        v + s
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut y = b.clone();
    let scale = rows.iter().flat_map(|r| r.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    for k in 0..n.saturating_sub(1) {
        if rows[k + 1][k].norm() > rows[k][k].norm() {
            rows.swap(k, k + 1);
            y.swap_rows(k, k + 1);
        }
        let piv = rows[k][k];
        if !(piv.norm() > 1e-300) {
            return None;
        }
        let factor = rows[k + 1][k] / piv;
        if factor != Complex64::new(0.0, 0.0) {
            let (top, bottom) = rows.split_at_mut(k + 1);
            let (src, dst) = (&top[k], &mut bottom[0]);
            for j in k..n {
                dst[j] -= factor * src[j];
            }
            y[k + 1] = y[k + 1] - factor * y[k];
        }
    }
    for k in (0..n).rev() {
        let piv = rows[k][k];
        if !(piv.norm() > 1e-14 * scale) {
            return None;
        }
        let mut acc = y[k];
        for j in k + 1..n {
            acc -= rows[k][j] * y[j];
        }
        y[k] = acc / piv;
    }
    Some(y)
}

/// Charge difference `q(i) - q(j)` of each entry of the column-major `vec`.
fn vec_sectors(dim: usize, fock: usize) -> Vec<i64> {
    (0..dim * dim).map(|k| charge(k % dim, fock) - charge(k / dim, fock)).collect()
}

/// One invariant sector of the generator, reduced to Hessenberg form.
struct SectorSolve {
    h: DMatrix<f64>,
    seed: DVector<Complex64>,
    obs: DVector<f64>,
}

impl SectorSolve {
    fn new(l: &FullLiouvillian, rho: &DMatrix<f64>, idx: &[usize], seed: &DMatrix<f64>, b: &DMatrix<f64>) -> Self {
        let mut sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| l.generator[(idx[r], idx[c])]);
        // The seed is traceless, so moving the stationary eigenvalue away from
        // zero (L - c rho Tr) leaves the solution unchanged and keeps s = 0
        // regular. Only the sector holding rho is affected.
        let c = l.frame.max_rate().max(l.kappa).max(f64::MIN_POSITIVE);
        let dim = l.dim;
        for (col, &k) in idx.iter().enumerate() {
            if k % dim == k / dim {
                for (row, &r) in idx.iter().enumerate() {
                    sub[(row, col)] -= c * rho[(r % dim, r / dim)];
                }
            }
        }
        let hess = sub.hessenberg();
        let q = hess.q();
        let pick = |m: &DMatrix<f64>| DVector::from_iterator(idx.len(), idx.iter().map(|&k| m[(k % dim, k / dim)]));
        SectorSolve {
            h: hess.h(),
            seed: (q.transpose() * pick(seed)).map(|x| Complex64::new(x, 0.0)),
            obs: q.transpose() * pick(b),
        }
    }

    fn trace(&self, s: Complex64) -> Result<Complex64> {
        let y = hessenberg_solve(&self.h, s, &self.seed).ok_or(Error::SingularSolve { shift: s })?;
        Ok(self.obs.iter().zip(y.iter()).map(|(o, yv)| yv * *o).sum())
    }
}

/// `pref * Re Tr[B^dagger (s - L)^{-1} (B rho - <B> rho)]` over the grid.
///
/// The generator conserves the excitation-number difference between the two
/// sides of the density operator, so each solve runs inside the sectors the
/// seed occupies. That invariance is checked on the assembled matrix.
pub fn oracle_spectrum(
    l: &FullLiouvillian,
    rho: &DMatrix<f64>,
    channel: Channel,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    grid.validate()?;
    let (b, pref, sign) = channel.setup(l);
    let nu = grid.values();
    let meta = SpectrumMeta { source: "oracle".into(), n_max: l.n_max, kappa: l.kappa, frame: l.frame };
    if pref == 0.0 {
        let values = vec![0.0; nu.len()];
        return Ok(Spectrum { nu, values, kind: channel.kind(), meta });
    }
    let mean = (b * rho).trace();
    let seed = b * rho - rho * mean;

    let sectors = vec_sectors(l.dim, l.fock());
    let mut coupling = 0.0f64;
    for (c, col) in l.generator.column_iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            if sectors[r] != sectors[c] {
                coupling = coupling.max(v.abs());
            }
        }
    }
    if coupling > 0.0 {
        return Err(Error::SymmetryBroken(format!("generator couples excitation sectors ({coupling:e})")));
    }
    let mut occupied: Vec<i64> = sectors.iter().zip(seed.iter()).filter(|(_, v)| **v != 0.0).map(|(q, _)| *q).collect();
    occupied.sort_unstable();
    occupied.dedup();
    let solvers: Vec<SectorSolve> = occupied
        .iter()
        .map(|q| {
            let idx: Vec<usize> = (0..sectors.len()).filter(|&k| sectors[k] == *q).collect();
            SectorSolve::new(l, rho, &idx, &seed, b)
        })
        .collect();

    let values = nu
        .par_iter()
        .map(|&v| {
            let s = Complex64::new(0.0, sign * v);
            let mut tr = Complex64::new(0.0, 0.0);
            for solver in &solvers {
                tr += solver.trace(s)?;
            }
            Ok(pref * tr.re)
        })
        .collect::<Result<Vec<_>>>()?;
    let s = Spectrum { nu, values, kind: channel.kind(), meta };
    s.check()?;
    Ok(s)
}

/// Everything the dense path produces for one parameter set.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub liouvillian: FullLiouvillian,
    pub rho: DMatrix<f64>,
}

impl OracleSolution {
    pub fn solve(frame: &DressedFrame, kappa: f64, n_max: usize) -> Result<Self> {
        let liouvillian = build_liouvillian(frame, kappa, n_max)?;
        let rho = oracle_steady_state(&liouvillian)?;
        Ok(OracleSolution { liouvillian, rho })
    }

    pub fn steady_blocks(&self) -> BlockVector {
        project_blocks(&to_complex(&self.rho), self.liouvillian.n_max, 0)
    }

    /// Sideband-1 blocks of `B rho_s` for `B = a` or `R21`.
    pub fn seed_blocks(&self, channel: Channel) -> BlockVector {
        let (b, _, _) = channel.setup(&self.liouvillian);
        project_blocks(&to_complex(&(b * &self.rho)), self.liouvillian.n_max, 1)
    }

    pub fn spectrum(&self, channel: Channel, grid: &FrequencyGrid) -> Result<Spectrum> {
        oracle_spectrum(&self.liouvillian, &self.rho, channel, grid)
    }

    pub fn mean_photon_number(&self) -> f64 {
        let ops = &self.liouvillian.ops;
        (ops.a.transpose() * &ops.a * &self.rho).trace()
    }

    pub fn fock(&self) -> usize {
        self.liouvillian.fock()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> DressedFrame {
        DressedFrame::from_rates(2.5, 0.7, 0.36, 0.16)
    }

    #[test]
    fn dimensions() {
        let l = build_liouvillian(&frame(), 0.05, 1).unwrap();
        assert_eq!(l.dim, 4);
        assert_eq!(l.generator.shape(), (16, 16));
        assert!(build_liouvillian(&frame(), 0.05, MAX_N + 1).is_err());
    }

    #[test]
    fn trace_is_left_null_vector() {
        let l = build_liouvillian(&frame(), 0.05, 4).unwrap();
        let d = l.dim;
        for col in 0..d * d {
            let s: f64 = (0..d).map(|i| l.generator[(i * d + i, col)]).sum();
            assert!(s.abs() < 1e-13, "col {col}: {s}");
        }
    }

    #[test]
    fn vectorized_and_operator_forms_agree() {
        let l = build_liouvillian(&frame(), 0.05, 3).unwrap();
        let d = l.dim;
        let rho = DMatrix::from_fn(d, d, |i, j| {
            Complex64::new((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.1)
        });
        let diff = (l.apply(&rho) - l.apply_direct(&rho)).map(|z| z.norm()).max();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn dark_state() {
        let mut f = frame();
        f.gamma_plus = 0.0;
        let l = build_liouvillian(&f, 0.05, 3).unwrap();
        let fock = 4;
        let mut rho = DMatrix::<Complex64>::zeros(l.dim, l.dim);
        rho[(fock, fock)] = Complex64::new(1.0, 0.0);
        assert!(l.apply(&rho).map(|z| z.norm()).max() < 1e-15);
        let ss = oracle_steady_state(&l).unwrap();
        assert!((ss[(fock, fock)] - 1.0).abs() < 1e-12);
        let grid = FrequencyGrid::symmetric(10.0, 21);
        let s = oracle_spectrum(&l, &ss, Channel::Cavity, &grid).unwrap();
        assert!(s.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hessenberg_solver_matches_dense() {
        let l = build_liouvillian(&frame(), 0.05, 2).unwrap();
        let hess = l.generator.clone().hessenberg();
        let h = hess.h();
        let b = DVector::from_fn(h.nrows(), |i, _| Complex64::new(i as f64 * 0.1 - 0.3, 0.2));
        let s = Complex64::new(0.0, 1.7);
        let y = hessenberg_solve(&h, s, &b).unwrap();
        let m = DMatrix::<Complex64>::identity(h.nrows(), h.nrows()) * s - to_complex(&h);
        let r = (&m * &y - &b).norm();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn steady_state_is_physical() {
        let sol = OracleSolution::solve(&frame(), 0.05, 6).unwrap();
        assert!((sol.rho.trace() - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&sol.rho) > -1e-10);
        assert!(sector_leakage(&sol.rho, 6) < 1e-10);
        assert!(mean_field(&sol.liouvillian, &sol.rho) < 1e-10);
        let max_re = sol.liouvillian.eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re < 1e-10);
    }
}
