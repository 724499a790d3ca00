//! Block-tridiagonal linear solves with 4x4 complex blocks.
//!
//! Row `n` of the system reads `lower[n] x[n-1] + diag[n] x[n] + upper[n] x[n+1] = b[n]`
//! (`lower[0]` and `upper[last]` are ignored). Each 4x4 pivot block is
//! factorized with partial pivoting.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type CMat4 = Matrix4<Complex64>;
pub type CVec4 = Vector4<Complex64>;

/// Elimination order for the block recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Top-down block Gaussian elimination (block Thomas algorithm).
    #[default]
    BlockThomas,
    /// Bottom-up elimination: the matrix continued fraction
    /// `D_n = diag_n - upper_n D_{n+1}^{-1} lower_{n+1}`.
    ContinuedFraction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SingularBlock {
    pub index: usize,
}

/// Relative pivot threshold below which a block is reported singular.
const PIVOT_EPS: f64 = 1e-14;

struct Factor {
    lu: nalgebra::LU<Complex64, nalgebra::U4, nalgebra::U4>,
}

impl Factor {
    fn new(m: CMat4, index: usize) -> Result<Self, SingularBlock> {
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lu = m.lu();
        let u = lu.u();
        let min_pivot = (0..4).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if !(min_pivot > PIVOT_EPS * scale) || scale == 0.0 {
            return Err(SingularBlock { index });
        }
        Ok(Factor { lu })
    }

    fn solve(&self, b: &CVec4) -> CVec4 {
        self.lu.solve(b).expect("factor checked nonsingular")
    }

    fn solve_mat(&self, b: &CMat4) -> CMat4 {
        self.lu.solve(b).expect("factor checked nonsingular")
    }
}

pub(crate) fn solve(
    backend: Backend,
    lower: &[CMat4],
    diag: &[CMat4],
    upper: &[CMat4],
    rhs: &[CVec4],
) -> Result<Vec<CVec4>, SingularBlock> {
    debug_assert!(lower.len() == diag.len() && upper.len() == diag.len() && rhs.len() == diag.len());
    match backend {
        Backend::BlockThomas => thomas(lower, diag, upper, rhs),
        Backend::ContinuedFraction => continued_fraction(lower, diag, upper, rhs),
    }
}

fn thomas(lower: &[CMat4], diag: &[CMat4], upper: &[CMat4], rhs: &[CVec4]) -> Result<Vec<CVec4>, SingularBlock> {
    let n = diag.len();
    let mut factors: Vec<Factor> = Vec::with_capacity(n);
    let mut y: Vec<CVec4> = Vec::with_capacity(n);
    factors.push(Factor::new(diag[0], 0)?);
    y.push(rhs[0]);
    for i in 1..n {
        // D'_i = diag_i - lower_i D'_{i-1}^{-1} upper_{i-1}
        let prev = &factors[i - 1];
        let w = prev.solve_mat(&upper[i - 1]);
        let z = prev.solve(&y[i - 1]);
        let d = diag[i] - lower[i] * w;
        factors.push(Factor::new(d, i)?);
        y.push(rhs[i] - lower[i] * z);
    }
    let mut x = vec![CVec4::zeros(); n];
    x[n - 1] = factors[n - 1].solve(&y[n - 1]);
    for i in (0..n - 1).rev() {
        x[i] = factors[i].solve(&(y[i] - upper[i] * x[i + 1]));
    }
    Ok(x)
}

fn continued_fraction(
    lower: &[CMat4],
    diag: &[CMat4],
    upper: &[CMat4],
    rhs: &[CVec4],
) -> Result<Vec<CVec4>, SingularBlock> {
    let n = diag.len();
    let mut factors: Vec<Option<Factor>> = (0..n).map(|_| None).collect();
    let mut bt = vec![CVec4::zeros(); n];
    factors[n - 1] = Some(Factor::new(diag[n - 1], n - 1)?);
    bt[n - 1] = rhs[n - 1];
    for i in (0..n - 1).rev() {
        let next = factors[i + 1].as_ref().expect("filled");
        let w = next.solve_mat(&lower[i + 1]);
        let z = next.solve(&bt[i + 1]);
        factors[i] = Some(Factor::new(diag[i] - upper[i] * w, i)?);
        bt[i] = rhs[i] - upper[i] * z;
    }
    let mut x = vec![CVec4::zeros(); n];
    x[0] = factors[0].as_ref().expect("filled").solve(&bt[0]);
    for i in 1..n {
        let f = factors[i].as_ref().expect("filled");
        x[i] = f.solve(&(bt[i] - lower[i] * x[i - 1]));
    }
    Ok(x)
}
