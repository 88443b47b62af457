//! Dense complex linear algebra used throughout the engine.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Products go through
//! `matrixmultiply::zgemm`; the generic nalgebra product is several times
//! slower for complex scalars and dominates propagation cost.

mod eigen;
mod expm;
mod nullspace;
mod svd;

pub use eigen::{eig_general, schur, EigenDecomposition, Schur};
pub use expm::expm;
pub use nullspace::{null_space, singular_values};
pub use svd::{svd, Svd};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Builds a matrix from row-major entries, rejecting wrong lengths and
/// non-finite values.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<CMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!("empty {rows}x{cols} matrix")));
    }
    if entries.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let m = CMatrix::from_row_slice(rows, cols, entries);
    if !is_finite(&m) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(m)
}

pub fn to_row_major(m: &CMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// `a * b` through zgemm.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.nrows(), b.ncols());
    gemm_into(ONE, a, b, ZERO, &mut c);
    c
}

/// `c <- alpha * a * b + beta * c` through zgemm.
pub fn gemm_into(alpha: C64, a: &CMatrix, b: &CMatrix, beta: C64, c: &mut CMatrix) {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    assert_eq!(c.nrows(), a.nrows());
    assert_eq!(c.ncols(), b.ncols());
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    if m == 0 || n == 0 {
        return;
    }
    // Complex<f64> is repr(C) { re, im }, the layout zgemm expects; nalgebra
    // storage is column-major with unit row stride.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [beta.re, beta.im],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Maximum absolute column sum.
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `‖m - m†‖_F`
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::NAN)
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_square(a, "system matrix")?;
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, system is {}x{}",
            b.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Domain("singular system matrix".into()))
}

/// Multiplies `z` by a unit phase so the chosen reference entry becomes real
/// and non-negative. The reference is the largest diagonal entry (first in
/// index order among near-ties); matrices with a negligible diagonal use the
/// largest entry in column-major order instead.
pub fn fix_phase(m: &mut CMatrix) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    let pick = |cands: &mut dyn Iterator<Item = C64>| -> Option<C64> {
        let vals: Vec<C64> = cands.collect();
        let best = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if best <= 1e-10 * scale {
            return None;
        }
        vals.into_iter().find(|z| z.norm() >= best * (1.0 - 1e-9))
    };
    let n = m.nrows().min(m.ncols());
    let reference = pick(&mut (0..n).map(|i| m[(i, i)]))
        .or_else(|| pick(&mut m.iter().copied()))
        .unwrap_or(ONE);
    let phase = reference.conj() / reference.norm();
    m.iter_mut().for_each(|z| *z *= phase);
}
