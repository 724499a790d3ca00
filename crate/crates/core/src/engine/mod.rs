//! Block-tridiagonal form of the dressed-atom + cavity master equation.
//!
//! For a fixed sideband index `m` the Hermitian combinations
//! `rho^(1..4)_{n,n+m}` obey `dZ_n/dt = A_n Z_{n-1} + B_n Z_n + C_n Z_{n+1}`.
//! The generator stores those 4x4 blocks, and the module provides the two
//! kernels the spectra need: the stationary solution of the `m = 0` chain
//! and shifted resolvent solves `(s - L) X = Z(0)` of the `m = 1` chain.
//!
//! Truncation: the cavity is cut at Fock number `n_max`. The `m = 0` chain
//! then has blocks `n = 0..=n_max`, the `m = 1` chain `n = 0..n_max`. The top
//! blocks are the exact projection of the Fock-truncated master equation, so
//! the chains reproduce the dense Liouvillian in [`crate::oracle`] to rounding.

mod blocksolve;

pub use blocksolve::Backend;
use blocksolve::{CMat4, CVec4};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DressedFrame;

pub type Block = Matrix4<f64>;

/// Length-4 Hermitian-combination vectors `Z^(m)_n` over the Fock index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub m: usize,
    pub entries: Vec<Vector4<Complex64>>,
}

impl BlockVector {
    pub fn zeros(m: usize, len: usize) -> Self {
        BlockVector { m, entries: vec![Vector4::zeros(); len] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Component `k` (0-based) of block `n`; zero outside the stored range.
    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.entries.get(n).map_or(Complex64::new(0.0, 0.0), |v| v[k])
    }

    /// `sum_n Z_n[0]`; the trace for an `m = 0` density operator.
    pub fn trace(&self) -> Complex64 {
        self.entries.iter().map(|v| v[0]).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.entries.iter().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &BlockVector) -> f64 {
        let len = self.len().max(other.len());
        (0..len)
            .flat_map(|n| (0..4).map(move |k| (n, k)))
            .map(|(n, k)| (self.get(n, k) - other.get(n, k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> BlockVector {
        BlockVector { m: self.m, entries: self.entries.iter().map(|v| v * c).collect() }
    }

    pub fn conj(&self) -> BlockVector {
        BlockVector { m: self.m, entries: self.entries.iter().map(|v| v.map(|z| z.conj())).collect() }
    }

    /// Largest imaginary part relative to the vector norm.
    pub fn imag_ratio(&self) -> f64 {
        let im = self.entries.iter().flat_map(|v| v.iter()).map(|z| z.im.abs()).fold(0.0, f64::max);
        im / self.norm_inf().max(f64::MIN_POSITIVE)
    }
}

/// `alpha_{n,m} = sqrt(n (n + m))`.
pub fn alpha(n: usize, m: usize) -> f64 {
    ((n * (n + m)) as f64).sqrt()
}

/// `beta_{n,m} = n + m/2`.
pub fn beta(n: usize, m: usize) -> f64 {
    n as f64 + 0.5 * m as f64
}

/// Closed-form blocks `(A_n, B_n, C_n)` of the infinite recurrence.
pub fn recurrence_blocks(frame: &DressedFrame, kappa: f64, m: usize, n: usize) -> (Block, Block, Block) {
    let g1 = frame.g1;
    let gc = frame.coherence_decay;
    let (gp, gm) = (frame.gamma_plus, frame.gamma_minus);
    let b = beta(n, m);
    let b_next = beta(n + 1, m);

    let a = 0.5 * alpha(n, m);
    #[rustfmt::skip]
    let lower = Block::new(
        0.0,     0.0,    0.0, 0.0,
        0.0,     0.0,    0.0, 0.0,
        -a * g1, a * g1, 0.0, 0.0,
        0.0,     0.0,    0.0, 0.0,
    );
    #[rustfmt::skip]
    let diag = Block::new(
        -kappa * b,           0.0,                        -2.0 * g1,                 2.0 * g1,
        -(gp - gm),           -((gp + gm) + kappa * b),   -2.0 * g1,                 -2.0 * g1,
        0.5 * g1 * b,         0.5 * g1 * b,               -gc - kappa * (b - 0.5),   -kappa,
        -0.5 * g1 * b_next,   0.5 * g1 * b_next,          0.0,                       -gc - kappa * (b + 0.5),
    );
    let c = alpha(n + 1, m);
    #[rustfmt::skip]
    let upper = Block::new(
        c * kappa,        0.0,              0.0,       0.0,
        0.0,              c * kappa,        0.0,       0.0,
        0.0,              0.0,              c * kappa, 0.0,
        0.5 * c * g1,     0.5 * c * g1,     0.0,       c * kappa,
    );
    (lower, diag, upper)
}

/// The recurrence restricted to sideband `m` and truncated at Fock `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonalGenerator {
    pub m: usize,
    pub n_max: usize,
    pub frame: DressedFrame,
    pub kappa: f64,
    pub lower: Vec<Block>,
    pub diag: Vec<Block>,
    pub upper: Vec<Block>,
}

impl BlockTridiagonalGenerator {
    pub fn block_count(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm of the assembled generator.
    pub fn norm_inf(&self) -> f64 {
        let row_sum = |blk: &Block, r: usize| (0..4).map(|c| blk[(r, c)].abs()).sum::<f64>();
        (0..self.block_count())
            .flat_map(|n| (0..4).map(move |r| (n, r)))
            .map(|(n, r)| row_sum(&self.lower[n], r) + row_sum(&self.diag[n], r) + row_sum(&self.upper[n], r))
            .fold(0.0, f64::max)
    }
}

/// Block count of the chain for sideband `m` at Fock cutoff `n_max`.
pub fn chain_len(m: usize, n_max: usize) -> usize {
    n_max + 1 - m
}

pub fn build_generator(frame: &DressedFrame, kappa: f64, m: usize, n_max: usize) -> Result<BlockTridiagonalGenerator> {
    if m > 1 {
        return Err(Error::config("m", "only sideband indices 0 and 1 are supported"));
    }
    if n_max < 1 {
        return Err(Error::config("n_max", "must be >= 1"));
    }
    let len = chain_len(m, n_max);
    let mut lower = Vec::with_capacity(len);
    let mut diag = Vec::with_capacity(len);
    let mut upper = Vec::with_capacity(len);
    for n in 0..len {
        let (a, b, c) = recurrence_blocks(frame, kappa, m, n);
        lower.push(a);
        diag.push(b);
        upper.push(if n + 1 < len { c } else { Block::zeros() });
    }
    let top = len - 1;
    let gc = frame.coherence_decay;
    let pin_rate = |n: usize| {
        let r = gc + kappa * (n as f64 + 0.5);
        if r > 0.0 {
            r
        } else {
            1.0
        }
    };
    if m == 0 {
        // rho^(3)_{0,0} vanishes identically and rho^(4)_{n_max,n_max} needs
        // Fock n_max + 1; both rows become pure decays.
        diag[0].set_row(2, &nalgebra::RowVector4::new(0.0, 0.0, -pin_rate(0), 0.0));
        upper[0].set_row(2, &nalgebra::RowVector4::zeros());
        diag[top].set_row(3, &nalgebra::RowVector4::new(0.0, 0.0, 0.0, -pin_rate(top)));
        lower[top].set_row(3, &nalgebra::RowVector4::zeros());
    } else {
        // Top of the m = 1 chain: the a^dagger terms that would reach Fock
        // n_max + 1 are dropped.
        let nf = n_max as f64;
        diag[top][(2, 3)] = kappa * nf;
        diag[top][(3, 0)] = -0.25 * frame.g1 * nf;
        diag[top][(3, 1)] = 0.25 * frame.g1 * nf;
    }
    Ok(BlockTridiagonalGenerator { m, n_max, frame: *frame, kappa, lower, diag, upper })
}

fn check_len(gen: &BlockTridiagonalGenerator, z: &BlockVector) -> Result<()> {
    if z.len() != gen.block_count() {
        return Err(Error::DimensionMismatch { expected: gen.block_count(), got: z.len() });
    }
    if z.m != gen.m {
        return Err(Error::DimensionMismatch { expected: gen.m, got: z.m });
    }
    Ok(())
}

pub fn apply_generator(gen: &BlockTridiagonalGenerator, z: &BlockVector) -> Result<BlockVector> {
    check_len(gen, z)?;
    let len = gen.block_count();
    let cast = |b: &Block| b.map(|x| Complex64::new(x, 0.0));
    let entries = (0..len)
        .map(|n| {
            let mut out = cast(&gen.diag[n]) * z.entries[n];
            if n > 0 {
                out += cast(&gen.lower[n]) * z.entries[n - 1];
            }
            if n + 1 < len {
                out += cast(&gen.upper[n]) * z.entries[n + 1];
            }
            out
        })
        .collect();
    Ok(BlockVector { m: gen.m, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub backend: Backend,
    /// Relative residual accepted from a linear solve.
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { backend: Backend::BlockThomas, residual_tol: 1e-10 }
    }
}

fn complex_blocks(gen: &BlockTridiagonalGenerator, shift: Complex64) -> (Vec<CMat4>, Vec<CMat4>, Vec<CMat4>) {
    let neg = |b: &Block| b.map(|x| Complex64::new(-x, 0.0));
    let lower = gen.lower.iter().map(neg).collect();
    let upper = gen.upper.iter().map(neg).collect();
    let diag = gen.diag.iter().map(|b| neg(b) + CMat4::identity() * shift).collect();
    (lower, diag, upper)
}

/// Stationary `m = 0` solution normalized to unit trace.
///
/// The stationary system is singular (trace conservation); its first row is
/// replaced by the normalization `sum_n rho^(1)_{n,n} = 1`. The resulting
/// bordered system is solved as a rank-one update of the block-tridiagonal
/// system in which the replaced row only pins `rho^(1)_{0,0}`.
pub fn steady_state(gen: &BlockTridiagonalGenerator, opts: &SolverOptions) -> Result<BlockVector> {
    if gen.m != 0 {
        return Err(Error::config("m", "steady state requires the m = 0 generator"));
    }
    let (lower, mut diag, mut upper) = complex_blocks(gen, Complex64::new(0.0, 0.0));
    diag[0].set_row(0, &nalgebra::RowVector4::new(1.0, 0.0, 0.0, 0.0).map(|x| Complex64::new(x, 0.0)));
    upper[0].set_row(0, &nalgebra::RowVector4::zeros());
    let mut rhs = vec![CVec4::zeros(); gen.block_count()];
    rhs[0][0] = Complex64::new(1.0, 0.0);

    let y = blocksolve::solve(opts.backend, &lower, &diag, &upper, &rhs)
        .map_err(|e| Error::SingularSystem(format!("stationary system, pivot block {}", e.index)))?;
    let y = BlockVector { m: 0, entries: y };
    let total = y.trace();
    if !(total.norm() > f64::MIN_POSITIVE) || !total.re.is_finite() {
        return Err(Error::SingularSystem("normalization row is degenerate".into()));
    }
    let z = y.scale(total.inv());

    let r = apply_generator(gen, &z)?;
    let scale = gen.norm_inf() * z.norm_inf();
    if r.norm_inf() > opts.residual_tol * scale {
        return Err(Error::SingularSystem(format!(
            "stationary residual {:e} exceeds tolerance {:e}",
            r.norm_inf() / scale,
            opts.residual_tol
        )));
    }
    Ok(z)
}

/// Laplace-domain solve `(s I - L) X = rhs`.
pub fn resolvent_solve(
    gen: &BlockTridiagonalGenerator,
    shift: Complex64,
    rhs: &BlockVector,
    opts: &SolverOptions,
) -> Result<BlockVector> {
    check_len(gen, rhs)?;
    let (lower, diag, upper) = complex_blocks(gen, shift);
    let x = blocksolve::solve(opts.backend, &lower, &diag, &upper, &rhs.entries)
        .map_err(|_| Error::SingularSolve { shift })?;
    let x = BlockVector { m: gen.m, entries: x };

    let lx = apply_generator(gen, &x)?;
    let residual = x
        .entries
        .iter()
        .zip(&lx.entries)
        .zip(&rhs.entries)
        .flat_map(|((xv, lv), bv)| (0..4).map(move |k| (xv[k] * shift - lv[k] - bv[k]).norm()))
        .fold(0.0, f64::max);
    let scale = (shift.norm() + gen.norm_inf()) * x.norm_inf() + rhs.norm_inf();
    if !(residual <= opts.residual_tol * scale) {
        return Err(Error::SingularSolve { shift });
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub n_max: usize,
    /// Steady-state population of the top Fock level.
    pub tail_mass: f64,
}

/// Smallest cutoff on the doubling sequence `8, 16, ...` whose top steady-state
/// population drops below `tail_eps`.
pub fn auto_truncate(
    frame: &DressedFrame,
    kappa: f64,
    tail_eps: f64,
    cap: usize,
    opts: &SolverOptions,
) -> Result<TruncationReport> {
    let mut n_max = 8.min(cap).max(1);
    loop {
        let gen = build_generator(frame, kappa, 0, n_max)?;
        let tail = match steady_state(&gen, opts) {
            Ok(z) => z.get(n_max, 0).re.abs(),
            // A stationary solve that fails at finite cutoff is the undamped
            // ladder running into the cutoff.
            Err(Error::SingularSystem(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if tail < tail_eps {
            return Ok(TruncationReport { n_max, tail_mass: tail });
        }
        if n_max >= cap {
            return Err(Error::TruncationCap { cap, tail, tail_eps });
        }
        n_max = (2 * n_max).min(cap);
    }
}
