//! Time-periodic Lindblad models.
//!
//! H(t) = Σ_l h⁽ˡ⁾ e^{−ilΩt}, with every harmonic paired with its conjugate
//! (h⁽⁻ˡ⁾ = h⁽ˡ⁾†). Jump operators are static by default; an optional
//! Fourier series per jump, L(t) = L + Σ_l L⁽ˡ⁾ e^{−ilΩt}, is accepted by the
//! time-domain path but not by the extended-space solvers.

pub(crate) mod file;

pub use file::{ComplexPair, FourierEntry, JumpEntry, JumpHarmonicEntry, ModelFile};

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, ZERO};

/// Tolerance on h⁽⁻ˡ⁾ = h⁽ˡ⁾† (entrywise Frobenius defect).
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub operator: CMatrix,
    pub rate: f64,
    /// Extra time dependence, harmonic index → matrix. Empty for static jumps.
    pub harmonics: BTreeMap<i32, CMatrix>,
}

impl Jump {
    pub fn new(operator: CMatrix, rate: f64) -> Self {
        Jump {
            operator,
            rate,
            harmonics: BTreeMap::new(),
        }
    }

    pub fn is_static(&self) -> bool {
        self.harmonics.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    omega: f64,
    h_fourier: BTreeMap<i32, CMatrix>,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    /// Assembles a model without checking it; see [`LindbladModel::validate`]
    /// and [`LindbladModel::checked`].
    pub fn new(
        dim: usize,
        omega: f64,
        h_fourier: BTreeMap<i32, CMatrix>,
        jumps: Vec<Jump>,
    ) -> Self {
        LindbladModel {
            dim,
            omega,
            h_fourier,
            jumps,
        }
    }

    pub fn checked(
        dim: usize,
        omega: f64,
        h_fourier: BTreeMap<i32, CMatrix>,
        jumps: Vec<Jump>,
    ) -> Result<Self> {
        let m = Self::new(dim, omega, h_fourier, jumps);
        m.ensure_valid()?;
        Ok(m)
    }

    /// Time-independent model: H = h0, static jumps.
    pub fn constant(h0: CMatrix, jumps: Vec<Jump>, omega: f64) -> Result<Self> {
        let dim = h0.nrows();
        let mut h = BTreeMap::new();
        h.insert(0, h0);
        Self::checked(dim, omega, h, jumps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn h_fourier(&self) -> &BTreeMap<i32, CMatrix> {
        &self.h_fourier
    }

    /// h⁽ˡ⁾, or the zero matrix when absent.
    pub fn harmonic(&self, l: i32) -> CMatrix {
        self.h_fourier
            .get(&l)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.dim, self.dim))
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn max_harmonic(&self) -> u32 {
        let h = self.h_fourier.keys().map(|l| l.unsigned_abs());
        let j = self
            .jumps
            .iter()
            .flat_map(|j| j.harmonics.keys().map(|l| l.unsigned_abs()));
        h.chain(j).max().unwrap_or(0)
    }

    /// No time dependence anywhere (all nonzero harmonics vanish).
    pub fn is_static(&self) -> bool {
        let h_static = self
            .h_fourier
            .iter()
            .all(|(&l, m)| l == 0 || m.iter().all(|z| *z == ZERO));
        let j_static = self
            .jumps
            .iter()
            .all(|j| j.harmonics.values().all(|m| m.iter().all(|z| *z == ZERO)));
        h_static && j_static
    }

    pub fn has_static_jumps(&self) -> bool {
        self.jumps.iter().all(Jump::is_static)
    }

    pub fn is_closed(&self) -> bool {
        self.jumps.iter().all(|j| j.rate == 0.0)
    }

    /// H(t) = Σ_l h⁽ˡ⁾ e^{−ilΩt}
    pub fn hamiltonian_at(&self, t: f64) -> CMatrix {
        let mut h = CMatrix::zeros(self.dim, self.dim);
        for (&l, m) in &self.h_fourier {
            let phase = C64::from_polar(1.0, -(l as f64) * self.omega * t);
            h.zip_apply(m, |x, y| *x += y * phase);
        }
        h
    }

    /// L_μ(t) for jump `index`.
    pub fn jump_at(&self, index: usize, t: f64) -> CMatrix {
        let j = &self.jumps[index];
        let mut op = j.operator.clone();
        for (&l, m) in &j.harmonics {
            let phase = C64::from_polar(1.0, -(l as f64) * self.omega * t);
            op.zip_apply(m, |x, y| *x += y * phase);
        }
        op
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let n = self.dim;
        if n == 0 {
            v.push(Violation::ZeroDimension);
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            v.push(Violation::NonPositiveFrequency(self.omega));
        }
        for (&l, m) in &self.h_fourier {
            if m.shape() != (n, n) {
                v.push(Violation::Shape {
                    what: format!("h({l})"),
                    rows: m.nrows(),
                    cols: m.ncols(),
                    dim: n,
                });
                continue;
            }
            if !linalg::is_finite(m) {
                v.push(Violation::NonFinite(format!("h({l})")));
                continue;
            }
            // Each pair is reported once, from its non-negative side.
            if l < 0 && self.h_fourier.contains_key(&-l) {
                continue;
            }
            match self.h_fourier.get(&-l) {
                None => v.push(Violation::MissingConjugateHarmonic { l }),
                Some(partner) if partner.shape() == (n, n) => {
                    let defect = (partner - m.adjoint()).norm();
                    if !(defect <= HERMITICITY_TOL) {
                        v.push(Violation::NonHermitian { l, defect });
                    }
                }
                Some(_) => {}
            }
        }
        for (i, j) in self.jumps.iter().enumerate() {
            if !(j.rate.is_finite() && j.rate >= 0.0) {
                v.push(Violation::NegativeRate {
                    jump: i,
                    rate: j.rate,
                });
            }
            let mats = std::iter::once((None, &j.operator))
                .chain(j.harmonics.iter().map(|(l, m)| (Some(*l), m)));
            for (l, m) in mats {
                let what = match l {
                    None => format!("jump {i}"),
                    Some(l) => format!("jump {i} harmonic {l}"),
                };
                if m.shape() != (n, n) {
                    v.push(Violation::Shape {
                        what,
                        rows: m.nrows(),
                        cols: m.ncols(),
                        dim: n,
                    });
                } else if !linalg::is_finite(m) {
                    v.push(Violation::NonFinite(what));
                }
            }
        }
        ValidationReport { violations: v }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(report))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from_model(self))?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ZeroDimension,
    NonPositiveFrequency(f64),
    Shape {
        what: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    NonFinite(String),
    MissingConjugateHarmonic {
        l: i32,
    },
    NonHermitian {
        l: i32,
        defect: f64,
    },
    NegativeRate {
        jump: usize,
        rate: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroDimension => write!(f, "Hilbert-space dimension is zero"),
            Violation::NonPositiveFrequency(w) => {
                write!(f, "drive frequency must be positive and finite, got {w}")
            }
            Violation::Shape {
                what,
                rows,
                cols,
                dim,
            } => write!(f, "{what} is {rows}x{cols}, expected {dim}x{dim}"),
            Violation::NonFinite(what) => write!(f, "{what} has non-finite entries"),
            Violation::MissingConjugateHarmonic { l } => {
                write!(f, "harmonic {l} has no partner at {}", -l)
            }
            Violation::NonHermitian { l, defect } => write!(
                f,
                "h({}) differs from h({l})^dagger by {defect:.3e}",
                -l
            ),
            Violation::NegativeRate { jump, rate } => {
                write!(f, "jump {jump} has negative rate {rate}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Density matrix tolerances used by [`DensityMatrix::check`].
#[derive(Debug, Clone, Copy)]
pub struct PhysicalTolerance {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl Default for PhysicalTolerance {
    fn default() -> Self {
        PhysicalTolerance {
            hermiticity: 1e-10,
            trace: 1e-10,
            min_eigenvalue: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub hermiticity_defect: f64,
    pub trace: C64,
    pub min_eigenvalue: f64,
}

impl Physicality {
    pub fn passes(&self, tol: &PhysicalTolerance) -> bool {
        self.hermiticity_defect <= tol.hermiticity
            && (self.trace - C64::new(1.0, 0.0)).norm() <= tol.trace
            && self.min_eigenvalue >= -tol.min_eigenvalue
    }
}

/// An N×N operator on the system Hilbert space. Not necessarily physical;
/// [`DensityMatrix::check`] reports how far it is from a state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        linalg::ensure_square(&mat, "density matrix")?;
        Ok(DensityMatrix(mat))
    }

    /// Builds a state and insists it is physical.
    pub fn physical(mat: CMatrix, tol: &PhysicalTolerance) -> Result<Self> {
        let rho = Self::new(mat)?;
        let p = rho.check();
        if !p.passes(tol) {
            return Err(Error::Domain(format!(
                "not a physical state: hermiticity defect {:.3e}, trace {}, min eigenvalue {:.3e}",
                p.hermiticity_defect, p.trace, p.min_eigenvalue
            )));
        }
        Ok(rho)
    }

    pub fn pure(dim: usize, level: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(level, level)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim, dim).scale(1.0 / dim as f64))
    }

    /// ½(I + r·σ) for a two-level system.
    pub fn from_bloch(r: [f64; 3]) -> Self {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0 + r[2], 0.0),
                C64::new(r[0], -r[1]),
                C64::new(r[0], r[1]),
                C64::new(1.0 - r[2], 0.0),
            ],
        );
        DensityMatrix(m.scale(0.5))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.0)
    }

    pub fn check(&self) -> Physicality {
        Physicality {
            hermiticity_defect: linalg::hermiticity_defect(&self.0),
            trace: self.trace(),
            min_eigenvalue: linalg::min_hermitian_eigenvalue(&self.0),
        }
    }
}
