//! General complex eigendecomposition: Householder reduction to Hessenberg
//! form, single-shift implicit QR to a complex Schur form `A = Q T Q†`, then
//! eigenvectors of the triangular factor by back substitution.

use super::{ensure_square, matmul, CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const SAFE_MIN: f64 = f64::MIN_POSITIVE;

/// Beyond this condition number the inverse of the right eigenvector matrix is
/// not trusted as the left eigenvector set.
const LEFT_INVERSE_COND_MAX: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct Schur {
    pub q: CMatrix,
    pub t: CMatrix,
    pub sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors as columns.
    pub right: CMatrix,
    /// Left eigenvectors as rows: `left * A = diag(q) * left`, scaled so that
    /// `left * right = I` wherever the decomposition is diagonalizable.
    pub left: CMatrix,
    /// `‖V‖_F ‖V⁻¹‖_F` for the right eigenvector matrix V; infinite when V is
    /// numerically singular (defective input).
    pub condition_estimate: f64,
    /// `‖A v_j − q_j v_j‖ / ‖A‖_F` per eigenpair.
    pub residuals: Vec<f64>,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|v_i† v_j|` over distinct unit right eigenvectors. Close to 1
    /// when the matrix is (nearly) defective.
    pub fn max_overlap(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let o = self.right.column(i).dotc(&self.right.column(j)).norm();
                worst = worst.max(o);
            }
        }
        worst
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.condition_estimate.is_finite() && self.condition_estimate < LEFT_INVERSE_COND_MAX
    }
}

/// |re| + |im|, the cheap modulus used for deflation tests.
fn abs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Complex Schur decomposition.
pub fn schur(a: &CMatrix) -> Result<Schur> {
    let n = ensure_square(a, "eigenvalue input")?;
    let mut t = a.clone();
    let mut q = CMatrix::identity(n, n);
    hessenberg(&mut t, &mut q);
    let sweeps = hessenberg_qr(&mut t, &mut q)?;
    Ok(Schur { q, t, sweeps })
}

fn hessenberg(a: &mut CMatrix, q: &mut CMatrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut v: Vec<C64> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);

        // A <- H A on rows k+1.., H = I - 2 v v†
        for j in k..n {
            let mut s = ZERO;
            for i in 0..len {
                s += v[i].conj() * a[(k + 1 + i, j)];
            }
            let s2 = s * 2.0;
            for i in 0..len {
                a[(k + 1 + i, j)] -= v[i] * s2;
            }
        }
        // A <- A H and Q <- Q H on columns k+1..
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let mut s = ZERO;
                for p in 0..len {
                    s += m[(i, k + 1 + p)] * v[p];
                }
                let s2 = s * 2.0;
                for p in 0..len {
                    m[(i, k + 1 + p)] -= s2 * v[p].conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Rotation `G = [[c, s], [-s̄, c]]` with real c, chosen so `G [x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Reduces an upper Hessenberg matrix to upper triangular form in place,
/// accumulating the rotations into `z`. Returns the number of QR sweeps.
fn hessenberg_qr(h: &mut CMatrix, z: &mut CMatrix) -> Result<usize> {
    let n = h.nrows();
    if n == 0 {
        return Ok(0);
    }
    let max_sweeps = 100 * n.max(10);
    let mut sweeps = 0usize;
    let mut hi = n - 1;
    let mut its = 0usize;

    while hi > 0 {
        // Look for a negligible subdiagonal entry in the active block.
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let mut tst = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if tst == 0.0 {
                tst = (lo.saturating_sub(1)..=hi)
                    .flat_map(|r| (r.saturating_sub(1)..=hi).map(move |c| (r, c)))
                    .map(|rc| abs1(h[rc]))
                    .sum();
            }
            if sub <= (EPS * tst).max(SAFE_MIN) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }

        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                lo,
                hi,
                dim: n,
            });
        }
        sweeps += 1;
        its += 1;

        let shift = if its % 30 == 10 {
            h[(lo, lo)] + h[(lo + 1, lo)].re.abs() * 0.75
        } else if its % 30 == 20 {
            h[(hi, hi)] + h[(hi, hi - 1)].re.abs() * 0.75
        } else {
            wilkinson_shift(h, hi)
        };

        // Implicit single-shift sweep over rows/cols lo..=hi, applied to the
        // full matrix so the result is a complete Schur factor.
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let col0 = if k > lo { k - 1 } else { lo };
            for j in col0..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    Ok(sweeps)
}

/// Eigenvalue of the trailing 2x2 block of the active window closest to its
/// last diagonal entry.
fn wilkinson_shift(h: &CMatrix, hi: usize) -> C64 {
    let mut t = h[(hi, hi)];
    let u = h[(hi - 1, hi)].sqrt() * h[(hi, hi - 1)].sqrt();
    let s = abs1(u);
    if s != 0.0 {
        let x = (h[(hi - 1, hi - 1)] - t) * 0.5;
        let sx = abs1(x);
        let s = s.max(abs1(x));
        let mut y = ((x / s) * (x / s) + (u / s) * (u / s)).sqrt() * s;
        if sx > 0.0 {
            let xs = x / sx;
            if xs.re * y.re + xs.im * y.im < 0.0 {
                y = -y;
            }
        }
        let denom = x + y;
        if denom != ZERO {
            t -= u * (u / denom);
        }
    }
    t
}

/// Full eigendecomposition of a square complex matrix.
pub fn eig_general(a: &CMatrix) -> Result<EigenDecomposition> {
    let n = ensure_square(a, "eigenvalue input")?;
    if !super::is_finite(a) {
        return Err(Error::Domain("eigenvalue input has non-finite entries".into()));
    }
    let Schur { q, t, sweeps } = schur(a)?;
    let eigenvalues: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let tnorm = t.norm().max(SAFE_MIN);

    // Right eigenvectors of T: T y = t_kk y with y_k = 1, y_j = 0 for j > k.
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let smin = (EPS * abs1(lambda)).max(EPS * tnorm * 1e-3).max(SAFE_MIN);
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for m in j + 1..=k {
                s += t[(j, m)] * y[(m, k)];
            }
            let mut d = t[(j, j)] - lambda;
            if abs1(d) < smin {
                d = C64::new(smin, 0.0);
            }
            y[(j, k)] = -s / d;
        }
    }
    let mut right = matmul(&q, &y);
    for mut col in right.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::from(nrm);
        }
    }

    let anorm = a.norm().max(SAFE_MIN);
    let av = matmul(a, &right);
    let residuals = (0..n)
        .map(|j| (av.column(j) - right.column(j) * eigenvalues[j]).norm() / anorm)
        .collect();

    let inverse = right.clone().try_inverse().filter(super::is_finite);
    let cond = inverse
        .as_ref()
        .map(|inv| right.norm() * inv.norm())
        .unwrap_or(f64::INFINITY);

    let left = match inverse {
        Some(inv) if cond < LEFT_INVERSE_COND_MAX => inv,
        _ => triangular_left_vectors(&q, &t, &right),
    };

    Ok(EigenDecomposition {
        eigenvalues,
        right,
        left,
        condition_estimate: if cond.is_finite() { cond } else { f64::INFINITY },
        residuals,
        sweeps,
    })
}

/// Left eigenvectors from `T† u = conj(t_kk) u` (lower triangular), returned
/// as rows `w† = (Q u)†` scaled to `w† v = 1` where that product is not tiny.
fn triangular_left_vectors(q: &CMatrix, t: &CMatrix, right: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let tnorm = t.norm().max(SAFE_MIN);
    let mut u = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)].conj();
        let smin = (EPS * abs1(lambda)).max(EPS * tnorm * 1e-3).max(SAFE_MIN);
        u[(k, k)] = ONE;
        for j in k + 1..n {
            let mut s = ZERO;
            for m in k..j {
                s += t[(m, j)].conj() * u[(m, k)];
            }
            let mut d = t[(j, j)].conj() - lambda;
            if abs1(d) < smin {
                d = C64::new(smin, 0.0);
            }
            u[(j, k)] = -s / d;
        }
    }
    let w = matmul(q, &u);
    let mut left = w.adjoint();
    for k in 0..n {
        let mut row = left.row_mut(k);
        let nrm = row.norm();
        if nrm > 0.0 {
            row /= C64::from(nrm);
        }
        let p = (row.clone_owned() * right.column(k))[(0, 0)];
        if p.norm() > 1e-14 {
            row /= p;
        }
    }
    left
}
