//! Spectrum of the one-period evolution map U_F: classification, Jordan
//! structure, steady-state extraction and periodic eigenmodes.

mod export;
mod ness;

pub use export::{write_spectrum_csv, SpectrumRow};
pub use ness::{
    eigenmode_trajectory, extract_ness, extract_ness_from_samples, nondecaying_projection, Ness,
    NessOptions, Projection, TRAJECTORY_SAMPLES,
};

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::superop::{unvectorize, SuperKind, Superoperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralClass {
    /// |q| < 1: decays under repeated periods.
    Transient,
    /// |q| = 1 but q ≠ 1.
    NonDecaying,
    /// q = 1.
    Steady,
    /// |q| > 1; impossible for a CPTP map, so a sign of a non-physical input.
    Growing,
}

impl SpectralClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectralClass::Transient => "transient",
            SpectralClass::NonDecaying => "non_decaying",
            SpectralClass::Steady => "steady",
            SpectralClass::Growing => "growing",
        }
    }

    /// Non-decaying in the broad sense: on the unit circle, steady included.
    pub fn is_unit_circle(self) -> bool {
        matches!(self, SpectralClass::NonDecaying | SpectralClass::Steady)
    }
}

impl std::fmt::Display for SpectralClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralTolerance {
    /// |q − 1| at or below this counts as steady.
    pub steady: f64,
    /// ||q| − 1| at or below this counts as unit modulus.
    pub modulus: f64,
    /// Single-linkage distance for eigenvalue clusters.
    pub cluster: f64,
    /// Relative singular-value cutoff for geometric multiplicities.
    pub rank: f64,
}

impl Default for SpectralTolerance {
    fn default() -> Self {
        SpectralTolerance {
            steady: 1e-7,
            modulus: 1e-8,
            cluster: 1e-6,
            rank: 1e-8,
        }
    }
}

impl SpectralTolerance {
    pub fn classify(&self, q: C64) -> SpectralClass {
        let r = q.norm();
        if (q - 1.0).norm() <= self.steady {
            SpectralClass::Steady
        } else if (r - 1.0).abs() <= self.modulus {
            SpectralClass::NonDecaying
        } else if r > 1.0 {
            SpectralClass::Growing
        } else {
            SpectralClass::Transient
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("steady", self.steady),
            ("modulus", self.modulus),
            ("cluster", self.cluster),
            ("rank", self.rank),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} tolerance must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JordanCluster {
    pub id: usize,
    /// Mean of the member eigenvalues.
    pub center: C64,
    /// Indices into the spectrum.
    pub members: Vec<usize>,
    pub algebraic: usize,
    pub geometric: usize,
    pub on_unit_circle: bool,
}

impl JordanCluster {
    pub fn deficiency(&self) -> usize {
        self.algebraic - self.geometric
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct JordanReport {
    pub clusters: Vec<JordanCluster>,
    /// Cluster id per eigenvalue index.
    pub cluster_of: Vec<usize>,
}

impl JordanReport {
    pub fn deficient(&self) -> impl Iterator<Item = &JordanCluster> {
        self.clusters.iter().filter(|c| c.deficiency() > 0)
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.deficient().next().is_none()
    }

    fn check_unit_circle(&self) -> Result<()> {
        match self.deficient().find(|c| c.on_unit_circle) {
            Some(c) => Err(Error::Integrity(format!(
                "eigenvalue cluster {} at {:.12}{:+.12}i on the unit circle has geometric multiplicity {} \
                 below algebraic multiplicity {}",
                c.id, c.center.re, c.center.im, c.geometric, c.algebraic
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FloquetSpectrum {
    /// Eigenvalues q_j, sorted by decreasing modulus then by phase in [0, 2π).
    pub eigenvalues: Vec<C64>,
    /// Eigenoperators: unit Frobenius norm, phase-fixed.
    pub eigenoperators: Vec<CMatrix>,
    pub classes: Vec<SpectralClass>,
    /// Left eigenvectors as rows, dual to the vectorized eigenoperators.
    pub left: CMatrix,
    pub jordan: JordanReport,
    pub tolerance: SpectralTolerance,
    pub condition_estimate: f64,
    pub max_residual: f64,
    pub sweeps: usize,
}

impl FloquetSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim_hilbert(&self) -> usize {
        self.eigenoperators.first().map_or(0, |m| m.nrows())
    }

    pub fn indices_of(&self, class: SpectralClass) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.classes[j] == class).collect()
    }

    pub fn steady_indices(&self) -> Vec<usize> {
        self.indices_of(SpectralClass::Steady)
    }

    pub fn unit_circle_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.classes[j].is_unit_circle()).collect()
    }

    /// Largest modulus among transient eigenvalues, or 0 if there are none.
    pub fn second_modulus(&self) -> f64 {
        self.indices_of(SpectralClass::Transient)
            .into_iter()
            .map(|j| self.eigenvalues[j].norm())
            .fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Floquet exponent λ_j = log(q_j)/T on the branch Im λ ∈ [0, 2π/T).
    pub fn exponent(&self, j: usize, period: f64) -> C64 {
        floquet_exponent(self.eigenvalues[j], period)
    }

    pub fn cluster(&self, j: usize) -> &JordanCluster {
        &self.jordan.clusters[self.jordan.cluster_of[j]]
    }
}

/// λ = log(q)/T with Im λ ∈ [0, 2π/T).
pub fn floquet_exponent(q: C64, period: f64) -> C64 {
    let mut arg = q.arg();
    if arg < 0.0 {
        arg += 2.0 * PI;
    }
    if arg >= 2.0 * PI {
        arg = 0.0;
    }
    C64::new(q.norm().ln(), arg) / period
}

fn phase_key(q: C64) -> f64 {
    let a = q.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn ensure_map(uf: &Superoperator) -> Result<()> {
    if uf.kind() != SuperKind::Map {
        return Err(Error::Contract("spectral analysis expects an evolution map, not a generator".into()));
    }
    Ok(())
}

/// Single-linkage clusters of eigenvalues closer than `tol`.
fn cluster_indices(eigenvalues: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = eigenvalues.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn jordan_report(mat: &CMatrix, eigenvalues: &[C64], tol: &SpectralTolerance) -> Result<JordanReport> {
    let groups = cluster_indices(eigenvalues, tol.cluster);
    let mut cluster_of = vec![0; eigenvalues.len()];
    let mut clusters = Vec::with_capacity(groups.len());
    for (id, members) in groups.into_iter().enumerate() {
        let k = members.len();
        let center = members.iter().map(|&j| eigenvalues[j]).sum::<C64>() / k as f64;
        let geometric = if k == 1 {
            1
        } else {
            let spread = members
                .iter()
                .map(|&j| (eigenvalues[j] - center).norm())
                .fold(0.0, f64::max);
            let mut shifted = mat.clone();
            for i in 0..shifted.nrows() {
                shifted[(i, i)] -= center;
            }
            let sv = linalg::singular_values(&shifted);
            let smax = sv.iter().copied().fold(0.0, f64::max);
            let cutoff = (tol.rank * smax).max(10.0 * spread);
            sv.iter().filter(|&&s| s <= cutoff).count().clamp(1, k)
        };
        for &j in &members {
            cluster_of[j] = id;
        }
        clusters.push(JordanCluster {
            id,
            center,
            algebraic: k,
            geometric,
            on_unit_circle: (center.norm() - 1.0).abs() <= tol.modulus.max(tol.cluster),
            members,
        });
    }
    Ok(JordanReport { clusters, cluster_of })
}

/// Clusters the spectrum of `uf` and compares algebraic with geometric
/// multiplicities. A deficient cluster on the unit circle is an integrity
/// error; deficiency elsewhere is only reported.
pub fn detect_jordan(uf: &Superoperator, cluster_tol: f64) -> Result<JordanReport> {
    ensure_map(uf)?;
    let tol = SpectralTolerance {
        cluster: cluster_tol,
        ..Default::default()
    };
    tol.validate()?;
    let eig = linalg::eig_general(uf.mat())?;
    let report = jordan_report(uf.mat(), &eig.eigenvalues, &tol)?;
    report.check_unit_circle()?;
    Ok(report)
}

pub fn decompose(uf: &Superoperator) -> Result<FloquetSpectrum> {
    decompose_with(uf, &SpectralTolerance::default())
}

pub fn decompose_with(uf: &Superoperator, tol: &SpectralTolerance) -> Result<FloquetSpectrum> {
    ensure_map(uf)?;
    tol.validate()?;
    let n = uf.dim_hilbert();
    let eig = linalg::eig_general(uf.mat())?;

    let mut order: Vec<usize> = (0..eig.dim()).collect();
    order.sort_by(|&a, &b| {
        let (qa, qb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        qb.norm()
            .total_cmp(&qa.norm())
            .then(phase_key(qa).total_cmp(&phase_key(qb)))
    });

    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut eigenoperators = Vec::with_capacity(order.len());
    let mut left = CMatrix::zeros(order.len(), order.len());
    for (pos, &j) in order.iter().enumerate() {
        let col = eig.right.column(j).clone_owned();
        let mut op = unvectorize(&col, n)?;
        let norm = op.norm();
        op /= C64::new(norm, 0.0);
        linalg::fix_phase(&mut op);
        // op = col·c with |c| = 1/norm·phase; keep left·right = 1
        let k = (0..col.len())
            .find(|&i| col[i].norm() > 0.0)
            .map(|i| op.as_slice()[i] / col[i])
            .unwrap_or(C64::new(1.0, 0.0));
        left.row_mut(pos).copy_from(&(eig.left.row(j) / k));
        eigenvalues.push(eig.eigenvalues[j]);
        eigenoperators.push(op);
    }
    let classes = eigenvalues.iter().map(|&q| tol.classify(q)).collect();
    let jordan = jordan_report(uf.mat(), &eigenvalues, tol)?;
    jordan.check_unit_circle()?;
    Ok(FloquetSpectrum {
        eigenvalues,
        eigenoperators,
        classes,
        left,
        jordan,
        tolerance: *tol,
        condition_estimate: eig.condition_estimate,
        max_residual: eig.max_residual(),
        sweeps: eig.sweeps,
    })
}
