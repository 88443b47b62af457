use super::svd::svd;
use super::CMatrix;
use crate::error::{Error, Result};

/// Singular values in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    match svd(m) {
        Ok(d) => d.s,
        Err(_) => m.singular_values().iter().copied().collect(),
    }
}

/// Orthonormal basis (as columns) of the numerical null space of `a`.
/// Singular values at or below `rank_tol * σ_max` count as zero; a zero
/// matrix has the whole space as its null space.
pub fn null_space(a: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    if !(rank_tol > 0.0) {
        return Err(Error::Domain(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    if a.ncols() == 0 {
        return Err(Error::Dimension("null space of a matrix with no columns".into()));
    }
    let d = svd(a)?;
    let n = a.ncols();
    let sigma_max = d.s.first().copied().unwrap_or(0.0);
    let cutoff = rank_tol * sigma_max;
    let idx: Vec<usize> = (0..n)
        .filter(|&i| sigma_max == 0.0 || d.s.get(i).is_none_or(|&s| s <= cutoff))
        .collect();
    let mut basis = CMatrix::zeros(n, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        basis.set_column(c, &d.v.column(i));
    }
    Ok(basis)
}
