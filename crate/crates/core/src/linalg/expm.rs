//! Matrix exponential by scaling and squaring with a truncated Taylor series
//! evaluated in Paterson-Stockmeyer form.

use super::{ensure_square, gemm_into, matmul, norm1, CMatrix, ONE};
use crate::error::Result;

/// Scaled argument norm ceiling; the series is summed only for ‖A/2^s‖₁ ≤ this.
const SCALED_NORM_MAX: f64 = 0.5;
/// Truncation remainder bound, well below the unit roundoff.
const REMAINDER_TOL: f64 = 1e-17;
const MAX_DEGREE: usize = 30;

pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(a, "expm argument")?;
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }
    let squarings = if norm > SCALED_NORM_MAX {
        (norm / SCALED_NORM_MAX).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings);
    let x = norm * scale;
    let degree = taylor_degree(x);
    let scaled = a.scale(scale);
    let mut e = taylor(&scaled, degree);
    for _ in 0..squarings {
        e = matmul(&e, &e);
    }
    Ok(e)
}

/// Smallest degree m with x^(m+1)/(m+1)! below the remainder tolerance.
fn taylor_degree(x: f64) -> usize {
    let mut term = x; // x^(m+1)/(m+1)! for m = 0
    for m in 1..MAX_DEGREE {
        term *= x / (m + 1) as f64;
        if term <= REMAINDER_TOL {
            return m;
        }
    }
    MAX_DEGREE
}

/// Σ_{k≤m} A^k/k! with ⌈√m⌉ stored powers and a Horner recursion in A^q.
fn taylor(a: &CMatrix, m: usize) -> CMatrix {
    let n = a.nrows();
    let q = ((m as f64).sqrt().ceil() as usize).max(1);
    let mut coef = Vec::with_capacity(m + 1);
    let mut c = 1.0;
    for k in 0..=m {
        if k > 0 {
            c /= k as f64;
        }
        coef.push(c);
    }

    let mut powers = Vec::with_capacity(q + 1);
    powers.push(CMatrix::identity(n, n));
    powers.push(a.clone());
    for k in 2..=q {
        let next = matmul(&powers[k - 1], a);
        powers.push(next);
    }

    // Block j holds coefficients jq .. jq+q-1 (the last one runs to m).
    let blocks = m / q;
    let block = |j: usize| -> CMatrix {
        let hi = if j == blocks { m } else { j * q + q - 1 };
        let mut b = CMatrix::zeros(n, n);
        for k in j * q..=hi {
            b.zip_apply(&powers[k - j * q], |x, y| *x += y * coef[k]);
        }
        b
    };

    let mut acc = block(blocks);
    for j in (0..blocks).rev() {
        let mut next = block(j);
        gemm_into(ONE, &acc, &powers[q], ONE, &mut next);
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, I, ZERO};

    /// Plain power series summed term by term.
    fn series(a: &CMatrix, terms: usize) -> CMatrix {
        let n = a.nrows();
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * a / C64::from(k as f64);
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        assert_eq!(expm(&CMatrix::zeros(3, 3)).unwrap(), CMatrix::identity(3, 3));
    }

    #[test]
    fn diagonal_phase() {
        let a = CMatrix::from_diagonal(&nalgebra::dvector![I * std::f64::consts::PI, ZERO]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] + ONE).norm() < 1e-14);
        assert!((e[(1, 1)] - ONE).norm() < 1e-15);
        assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn rotation_generator_matches_series_oracle() {
        let theta = 0.3;
        let a = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]).scale(theta);
        let oracle = series(&a, 30);
        // frozen from the 30-term series
        assert!((oracle[(0, 0)].re - 0.955_336_489_125_606).abs() < 1e-15);
        assert!((oracle[(0, 1)].re - 0.295_520_206_661_339_6).abs() < 1e-15);
        let e = expm(&a).unwrap();
        assert!((&e - &oracle).norm() < 1e-14);
        assert!((e[(1, 0)].re + 0.295_520_206_661_339_6).abs() < 1e-15);
    }

    #[test]
    fn large_norm_against_series_with_exact_scaling() {
        // ‖a‖ ≈ 10: compare against (series of a/16)^16, an independent route.
        let a = CMatrix::from_fn(4, 4, |i, j| {
            C64::new(((i * 3 + j * 5) % 7) as f64 - 3.0, ((i + j) % 3) as f64 - 1.0)
        })
        .scale(0.6);
        let mut oracle = series(&a.scale(1.0 / 16.0), 40);
        for _ in 0..4 {
            oracle = &oracle * &oracle;
        }
        let e = expm(&a).unwrap();
        let rel = (&e - &oracle).norm() / oracle.norm();
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(expm(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn degree_selection_is_monotone() {
        assert!(taylor_degree(1e-3) < taylor_degree(0.1));
        assert!(taylor_degree(0.1) <= taylor_degree(0.5));
        assert!(taylor_degree(0.5) < MAX_DEGREE);
    }
}
