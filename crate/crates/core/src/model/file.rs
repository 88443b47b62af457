//! JSON model documents.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "omega": 1.0,
//!   "h_fourier": [
//!     { "l": 0, "real_part": [[0, 0], [0, 1]], "imag_part": [[0, 0], [0, 0]] }
//!   ],
//!   "jumps": [
//!     { "matrix": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]], "rate": 1.0 }
//!   ]
//! }
//! ```
//!
//! Hamiltonian harmonics carry separate real and imaginary parts; jump
//! matrices are rows of `[re, im]` pairs. A jump may add `"harmonics"`, a list
//! of `{ "l": .., "matrix": .. }` terms multiplying e^{−ilΩt}. Unknown
//! top-level keys (such as an embedded `"run"` section) are ignored here.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Jump, LindbladModel};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierEntry {
    pub l: i32,
    pub real_part: Vec<Vec<f64>>,
    pub imag_part: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpHarmonicEntry {
    pub l: i32,
    pub matrix: Vec<Vec<ComplexPair>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpEntry {
    pub matrix: Vec<Vec<ComplexPair>>,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<JumpHarmonicEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub omega: f64,
    pub h_fourier: Vec<FourierEntry>,
    #[serde(default)]
    pub jumps: Vec<JumpEntry>,
}

fn rows_of<T>(rows: &[Vec<T>], what: &str) -> Result<(usize, usize)> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Parse(format!("{what}: ragged or empty matrix")));
    }
    Ok((r, c))
}

pub(crate) fn pairs_to_matrix(rows: &[Vec<ComplexPair>], what: &str) -> Result<CMatrix> {
    let (r, c) = rows_of(rows, what)?;
    Ok(CMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub(crate) fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<ComplexPair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn split_to_matrix(re: &[Vec<f64>], im: &[Vec<f64>], what: &str) -> Result<CMatrix> {
    let shape = rows_of(re, what)?;
    if rows_of(im, what)? != shape {
        return Err(Error::Parse(format!(
            "{what}: real and imaginary parts differ in shape"
        )));
    }
    Ok(CMatrix::from_fn(shape.0, shape.1, |i, j| {
        C64::new(re[i][j], im[i][j])
    }))
}

impl ModelFile {
    /// Converts to a model and validates it.
    pub fn into_model(self) -> Result<LindbladModel> {
        let mut h = BTreeMap::new();
        for e in &self.h_fourier {
            let m = split_to_matrix(&e.real_part, &e.imag_part, &format!("h_fourier l={}", e.l))?;
            if h.insert(e.l, m).is_some() {
                return Err(Error::Parse(format!("h_fourier: duplicate harmonic {}", e.l)));
            }
        }
        let mut jumps = Vec::with_capacity(self.jumps.len());
        for (i, j) in self.jumps.iter().enumerate() {
            let mut jump = Jump::new(pairs_to_matrix(&j.matrix, &format!("jump {i}"))?, j.rate);
            for hm in &j.harmonics {
                let m = pairs_to_matrix(&hm.matrix, &format!("jump {i} harmonic {}", hm.l))?;
                if jump.harmonics.insert(hm.l, m).is_some() {
                    return Err(Error::Parse(format!("jump {i}: duplicate harmonic {}", hm.l)));
                }
            }
            jumps.push(jump);
        }
        LindbladModel::checked(self.dim, self.omega, h, jumps)
    }

    pub fn from_model(m: &LindbladModel) -> Self {
        let h_fourier = m
            .h_fourier()
            .iter()
            .map(|(&l, mat)| FourierEntry {
                l,
                real_part: (0..mat.nrows())
                    .map(|i| (0..mat.ncols()).map(|j| mat[(i, j)].re).collect())
                    .collect(),
                imag_part: (0..mat.nrows())
                    .map(|i| (0..mat.ncols()).map(|j| mat[(i, j)].im).collect())
                    .collect(),
            })
            .collect();
        let jumps = m
            .jumps()
            .iter()
            .map(|j| JumpEntry {
                matrix: matrix_to_pairs(&j.operator),
                rate: j.rate,
                harmonics: j
                    .harmonics
                    .iter()
                    .map(|(&l, mat)| JumpHarmonicEntry {
                        l,
                        matrix: matrix_to_pairs(mat),
                    })
                    .collect(),
            })
            .collect();
        ModelFile {
            dim: m.dim(),
            omega: m.omega(),
            h_fourier,
            jumps,
        }
    }
}
