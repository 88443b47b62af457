//! One-sided Jacobi SVD.
//!
//! Columns of A are rotated pairwise until mutually orthogonal, accumulating
//! the rotations in V, so A V = U Σ. V is always a complete unitary basis,
//! which makes right null vectors reliable even for exactly singular input.

use super::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors for the nonzero singular values; zero columns
    /// elsewhere. Shape rows × min(rows, cols) after padding to square.
    pub u: CMatrix,
    /// Singular values in decreasing order.
    pub s: Vec<f64>,
    /// Right singular vectors as columns, cols × cols, unitary.
    pub v: CMatrix,
    pub sweeps: usize,
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Err(Error::Dimension("SVD of a matrix with no columns".into()));
    }
    let mut w = if rows < cols {
        let mut p = CMatrix::from_element(cols, cols, ZERO);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let m = w.nrows();
    let n = cols;
    let mut v = CMatrix::identity(n, n);
    let eps = f64::EPSILON * (m as f64).sqrt();
    // Columns this small are rounding noise of the null space.
    let floor = (f64::EPSILON * w.norm()).powi(2);

    let mut sweeps = 0;
    loop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                lo: 0,
                hi: n - 1,
                dim: n,
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let pc = phase.conj();
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)] * pc;
                    w[(i, p)] = x * c - y * s;
                    w[(i, q)] = x * s + y * c;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)] * pc;
                    v[(i, p)] = x * c - y * s;
                    v[(i, q)] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let k = m.min(n);
    let mut u = CMatrix::zeros(m, k);
    let mut vs = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (c, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        vs.set_column(c, &v.column(j));
        if c < k && norms[j] > 0.0 {
            u.set_column(c, &(w.column(j) / C64::new(norms[j], 0.0)));
        }
    }
    s.truncate(k.max(1).min(n));
    if rows < cols {
        // Padded rows contribute nothing; keep the true row count.
        u = u.rows(0, rows).into_owned();
    }
    Ok(Svd { u, s, v: vs, sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn pseudo(n: usize, m: usize, seed: u64) -> CMatrix {
        let mut x = seed;
        CMatrix::from_fn(n, m, |_, _| {
            let mut next = || {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            C64::new(next(), next())
        })
    }

    fn check(a: &CMatrix) {
        let d = svd(a).unwrap();
        let n = a.ncols();
        assert!((d.v.adjoint() * &d.v - CMatrix::identity(n, n)).norm() < 1e-13);
        let k = d.s.len();
        let sig = CMatrix::from_fn(k, k, |i, j| if i == j { C64::new(d.s[i], 0.0) } else { ZERO });
        let recon = &d.u * sig * d.v.columns(0, k).adjoint();
        assert!((recon - a).norm() < 1e-12 * (1.0 + a.norm()), "reconstruction");
        assert!(d.s.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn reconstructs_square_tall_and_wide() {
        for (r, c, seed) in [(4, 4, 1), (16, 16, 2), (9, 4, 3), (3, 7, 4), (1, 1, 5)] {
            check(&pseudo(r, c, seed));
        }
    }

    #[test]
    fn null_vector_of_singular_matrix() {
        let mut a = pseudo(6, 6, 9);
        let col = a.column(0) + a.column(1) * C64::new(0.0, 2.0);
        a.set_column(5, &col);
        let d = svd(&a).unwrap();
        assert!(d.s[5] < 1e-14 * d.s[0]);
        let nv = d.v.column(5);
        assert!((&a * nv).norm() < 1e-13);
    }

    #[test]
    fn zero_and_identity() {
        let d = svd(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(d.s, vec![0.0; 3]);
        let d = svd(&CMatrix::identity(3, 3)).unwrap();
        assert!(d.s.iter().all(|&s| (s - 1.0).abs() < 1e-15));
        assert_eq!(d.u[(0, 0)].norm(), ONE.norm());
    }
}
