use serde::Serialize;

use super::{FloquetSpectrum, SpectralClass};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::model::{DensityMatrix, LindbladModel, PhysicalTolerance};
use crate::propagator::{propagate, sample_period, PropagatorConfig, SampledPeriod};
use crate::superop::{unvectorize, vectorize, Superoperator};

/// Minimum number of trajectory samples per period.
pub const TRAJECTORY_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NessOptions {
    /// Most negative eigenvalue tolerated in the extracted state.
    pub psd_tol: f64,
    /// Budget of minimum-eigenvalue evaluations for degenerate steady spaces.
    pub max_evaluations: usize,
    pub samples: usize,
}

impl Default for NessOptions {
    fn default() -> Self {
        NessOptions {
            psd_tol: 1e-8,
            max_evaluations: 10_000,
            samples: TRAJECTORY_SAMPLES,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ness {
    pub rho0: DensityMatrix,
    /// ϱ₀(t) at evenly spaced times over one period, both ends included.
    pub trajectory: Vec<(f64, DensityMatrix)>,
    /// ‖U_F vec(ρ₀) − vec(ρ₀)‖₂.
    pub fixed_point_residual: f64,
    pub steady_dimension: usize,
    /// Minimum-eigenvalue evaluations spent by the search (0 when unique).
    pub evaluations: usize,
    pub min_eigenvalue: f64,
}

impl Ness {
    /// Distance between the first and last trajectory samples.
    pub fn periodicity_defect(&self) -> f64 {
        match (self.trajectory.first(), self.trajectory.last()) {
            (Some(a), Some(b)) => (a.1.mat() - b.1.mat()).norm(),
            _ => 0.0,
        }
    }
}

/// Partial products over one period at `samples` points, falling back to
/// independent propagations when the sample count does not divide the slices.
fn sampled(model: &LindbladModel, cfg: &PropagatorConfig, samples: usize) -> Result<SampledPeriod> {
    if model.is_static() || cfg.slices_per_period.is_multiple_of(samples) {
        return sample_period(model, cfg, samples);
    }
    let period = model.period();
    let times: Vec<f64> = (0..=samples)
        .map(|j| cfg.t0 + period * j as f64 / samples as f64)
        .collect();
    let maps = times
        .iter()
        .map(|&t| propagate(model, cfg, cfg.t0, t).map(Superoperator::into_mat))
        .collect::<Result<_>>()?;
    Ok(SampledPeriod { times, maps })
}

fn residual(uf: &CMatrix, rho: &CMatrix) -> f64 {
    let v = vectorize(rho);
    (uf * &v - &v).norm()
}

/// Real orthonormal basis of the Hermitian part of the steady space. Each
/// basis element is a Hermitian matrix of unit Frobenius norm.
fn hermitian_basis(ops: &[&CMatrix]) -> Result<Vec<CMatrix>> {
    let n = ops[0].nrows();
    let len = 2 * n * n;
    let mut cols = Vec::with_capacity(2 * ops.len());
    for r in ops {
        let herm = linalg::hermitian_part(r);
        let anti = (*r - r.adjoint()) * C64::new(0.0, -0.5);
        for m in [herm, anti] {
            cols.push(m.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>());
        }
    }
    let a = CMatrix::from_fn(len, cols.len(), |i, j| C64::new(cols[j][i], 0.0));
    let u = linalg::svd(&a)?.u;
    let basis = (0..ops.len())
        .map(|k| {
            let c = u.column(k);
            let m = CMatrix::from_fn(n, n, |i, j| {
                let p = 2 * (i + n * j);
                C64::new(c[p].re, c[p + 1].re)
            });
            linalg::hermitian_part(&m)
        })
        .collect::<Vec<_>>();
    Ok(basis)
}

struct Search {
    evaluations: usize,
    best: f64,
}

/// Maximizes λ_min(H₁ + Σ x_i K_i) by coordinate search, augmented with the
/// supergradient direction, until the candidate is positive semidefinite.
fn psd_search(h1: &CMatrix, ks: &[CMatrix], budget: usize) -> (CMatrix, Search) {
    let eval = |x: &[f64]| -> CMatrix {
        let mut m = h1.clone();
        for (xi, k) in x.iter().zip(ks) {
            m += k * C64::new(*xi, 0.0);
        }
        m
    };
    let min_eig = |m: &CMatrix| linalg::min_hermitian_eigenvalue(m);
    let mut x = vec![0.0; ks.len()];
    let mut cur = eval(&x);
    let mut f = min_eig(&cur);
    let mut evaluations = 1;
    let mut step = 0.5;
    while f < 0.0 && evaluations < budget && step > 1e-14 {
        let mut improved = false;
        let mut dirs: Vec<Vec<f64>> = (0..ks.len())
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut d = vec![0.0; ks.len()];
                    d[i] = s;
                    d
                })
            })
            .collect();
        if let Some(g) = supergradient(&cur, ks) {
            dirs.insert(0, g);
        }
        for d in dirs {
            if evaluations >= budget {
                break;
            }
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let m = eval(&trial);
            let ft = min_eig(&m);
            evaluations += 1;
            if ft > f {
                x = trial;
                cur = m;
                f = ft;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (cur, Search { evaluations, best: f })
}

/// Unit-norm direction v†K_i v for the lowest eigenvector v of `m`.
fn supergradient(m: &CMatrix, ks: &[CMatrix]) -> Option<Vec<f64>> {
    let eig = m.clone().symmetric_eigen();
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let v = eig.eigenvectors.column(imin);
    let g: Vec<f64> = ks.iter().map(|k| v.dotc(&(k * v)).re).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0).then(|| g.iter().map(|x| x / norm).collect())
}

fn steady_state(spectrum: &FloquetSpectrum, opts: &NessOptions) -> Result<(CMatrix, usize)> {
    let steady = spectrum.steady_indices();
    if steady.is_empty() {
        return Err(Error::Extraction(
            "no eigenvalue within the steady tolerance of 1".into(),
        ));
    }
    if steady.len() == 1 {
        let h = linalg::hermitian_part(&spectrum.eigenoperators[steady[0]]);
        let tr = linalg::trace(&h).re;
        if tr.abs() < 1e-12 {
            return Err(Error::Extraction("steady eigenoperator is traceless".into()));
        }
        return Ok((h / C64::new(tr, 0.0), 0));
    }

    let ops: Vec<&CMatrix> = steady.iter().map(|&j| &spectrum.eigenoperators[j]).collect();
    let basis = hermitian_basis(&ops)?;
    let traces: Vec<f64> = basis.iter().map(|b| linalg::trace(b).re).collect();
    let tt: f64 = traces.iter().map(|t| t * t).sum();
    if tt.sqrt() < 1e-12 {
        return Err(Error::Extraction("steady space contains no traceful operator".into()));
    }
    let mut h1 = CMatrix::zeros(basis[0].nrows(), basis[0].ncols());
    for (b, t) in basis.iter().zip(&traces) {
        h1 += b * C64::new(t / tt, 0.0);
    }
    // traceless directions: coefficient vectors orthogonal to the trace vector
    let s = basis.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for e in 0..s {
        let mut c: Vec<f64> = (0..s).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
        let p = traces[e] / tt;
        for (ci, ti) in c.iter_mut().zip(&traces) {
            *ci -= p * ti;
        }
        for d in &dirs {
            let dot: f64 = c.iter().zip(d).map(|(a, b)| a * b).sum();
            for (ci, di) in c.iter_mut().zip(d) {
                *ci -= dot * di;
            }
        }
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 && dirs.len() < s - 1 {
            dirs.push(c.iter().map(|x| x / norm).collect());
        }
    }
    let ks: Vec<CMatrix> = dirs
        .iter()
        .map(|d| {
            let mut k = CMatrix::zeros(h1.nrows(), h1.ncols());
            for (b, c) in basis.iter().zip(d) {
                k += b * C64::new(*c, 0.0);
            }
            k
        })
        .collect();
    let (rho, search) = psd_search(&h1, &ks, opts.max_evaluations);
    if search.best < -opts.psd_tol.min(1e-10) {
        return Err(Error::Extraction(format!(
            "no positive semidefinite state in the {s}-dimensional steady space after {} evaluations \
             (best minimum eigenvalue {:.3e})",
            search.evaluations, search.best
        )));
    }
    let rho = linalg::hermitian_part(&rho);
    let tr = linalg::trace(&rho).re;
    Ok((rho / C64::new(tr, 0.0), search.evaluations))
}

/// Certified physical steady state and its periodic trajectory.
pub fn extract_ness(
    spectrum: &FloquetSpectrum,
    uf: &Superoperator,
    model: &LindbladModel,
    cfg: &PropagatorConfig,
) -> Result<Ness> {
    let opts = NessOptions::default();
    let samples = sampled(model, cfg, opts.samples)?;
    let mut ness = extract_ness_from_samples(spectrum, &samples, &opts)?;
    ness.fixed_point_residual = residual(uf.mat(), ness.rho0.mat());
    Ok(ness)
}

/// As [`extract_ness`], reusing maps recorded while building U_F (the last
/// sample is taken as U_F).
pub fn extract_ness_from_samples(
    spectrum: &FloquetSpectrum,
    samples: &SampledPeriod,
    opts: &NessOptions,
) -> Result<Ness> {
    let (rho, evaluations) = steady_state(spectrum, opts)?;
    let tol = PhysicalTolerance {
        min_eigenvalue: opts.psd_tol,
        ..Default::default()
    };
    let min_eigenvalue = linalg::min_hermitian_eigenvalue(&rho);
    let rho0 = DensityMatrix::physical(rho, &tol).map_err(|e| Error::Extraction(e.to_string()))?;
    let n = rho0.dim();
    let v = vectorize(rho0.mat());
    let trajectory = samples
        .times
        .iter()
        .zip(&samples.maps)
        .map(|(&t, u)| Ok((t, DensityMatrix::new(unvectorize(&(u * &v), n)?)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ness {
        fixed_point_residual: residual(samples.floquet(), rho0.mat()),
        steady_dimension: spectrum.steady_indices().len(),
        evaluations,
        min_eigenvalue,
        trajectory,
        rho0,
    })
}

/// ϱ_j(t) = e^{−λ(t−t₀)} U(t, t₀) ρ_j over one period, both ends included.
pub fn eigenmode_trajectory(
    model: &LindbladModel,
    cfg: &PropagatorConfig,
    lambda: C64,
    rho: &CMatrix,
) -> Result<Vec<(f64, CMatrix)>> {
    let samples = sampled(model, cfg, TRAJECTORY_SAMPLES)?;
    eigenmode_from_samples(&samples, model.period(), lambda, rho)
}

pub fn eigenmode_from_samples(
    samples: &SampledPeriod,
    period: f64,
    lambda: C64,
    rho: &CMatrix,
) -> Result<Vec<(f64, CMatrix)>> {
    let n = rho.nrows();
    let v = vectorize(rho);
    let q = (lambda * period).exp();
    let res = (samples.floquet() * &v - &v * q).norm();
    if res > 1e-7 * v.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!(
            "not an eigenpair of the one-period map: residual {res:.3e}"
        )));
    }
    let t0 = samples.times[0];
    samples
        .times
        .iter()
        .zip(&samples.maps)
        .map(|(&t, u)| {
            let envelope = (-lambda * (t - t0)).exp();
            Ok((t, unvectorize(&(u * &v * envelope), n)?))
        })
        .collect()
}

/// Expansion of a state's non-decaying part over the unit-circle
/// eigenoperators.
#[derive(Debug, Clone, Serialize)]
pub struct Projection {
    pub dim: usize,
    /// Spectrum indices of the unit-circle eigenpairs.
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<C64>,
    pub coefficients: Vec<C64>,
    #[serde(skip)]
    pub operators: Vec<CMatrix>,
    /// Worst condition number of the per-cluster biorthogonalization.
    pub condition: f64,
    pub warning: Option<String>,
}

impl Projection {
    /// Σ_j a_j q_j^m ρ_j, the long-time stroboscopic limit after m periods.
    pub fn at_period(&self, m: u64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for ((a, q), op) in self.coefficients.iter().zip(&self.eigenvalues).zip(&self.operators) {
            out += op * (a * q.powu(m.min(u32::MAX as u64) as u32));
        }
        out
    }

    pub fn steady_part(&self, spectrum: &FloquetSpectrum) -> CMatrix {
        let n = spectrum.dim_hilbert();
        let mut out = CMatrix::zeros(n, n);
        for ((&j, a), op) in self.indices.iter().zip(&self.coefficients).zip(&self.operators) {
            if spectrum.classes[j] == SpectralClass::Steady {
                out += op * *a;
            }
        }
        out
    }
}

const CONDITION_WARN: f64 = 1e8;

/// Coefficients a_j of vec(ρ) along the unit-circle eigenoperators. Each
/// cluster is handled with its own left null space W and right basis R,
/// a = (W†R)⁻¹ W† vec(ρ), which is exact for diagonalizable clusters.
pub fn nondecaying_projection(
    spectrum: &FloquetSpectrum,
    uf: &Superoperator,
    rho_init: &DensityMatrix,
) -> Result<Projection> {
    if rho_init.dim() != spectrum.dim_hilbert() {
        return Err(Error::Dimension(format!(
            "{}x{} state for an N = {} spectrum",
            rho_init.dim(),
            rho_init.dim(),
            spectrum.dim_hilbert()
        )));
    }
    let v = vectorize(rho_init.mat());
    let mut proj = Projection {
        dim: rho_init.dim(),
        indices: Vec::new(),
        eigenvalues: Vec::new(),
        coefficients: Vec::new(),
        operators: Vec::new(),
        condition: 1.0,
        warning: None,
    };
    for cluster in &spectrum.jordan.clusters {
        let members: Vec<usize> = cluster
            .members
            .iter()
            .copied()
            .filter(|&j| spectrum.classes[j].is_unit_circle())
            .collect();
        if members.is_empty() {
            continue;
        }
        let k = members.len();
        let d = v.len();
        let r = CMatrix::from_fn(d, k, |i, c| spectrum.eigenoperators[members[c]].as_slice()[i]);
        let mut shifted = uf.mat().clone();
        for i in 0..d {
            shifted[(i, i)] -= cluster.center;
        }
        // Left singular vectors of (U − cI) are right ones of its adjoint.
        let left = linalg::svd(&shifted.adjoint())?.v;
        let w = left.columns(d - k, k).into_owned();
        let m = w.adjoint() * &r;
        let sv = linalg::singular_values(&m);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        proj.condition = proj.condition.max(cond);
        let rhs = w.adjoint() * CMatrix::from_column_slice(d, 1, v.as_slice());
        let a = linalg::solve(&m, &rhs).map_err(|_| {
            Error::Integrity(format!(
                "eigenvectors of unit-circle cluster {} are linearly dependent",
                cluster.id
            ))
        })?;
        for (c, &j) in members.iter().enumerate() {
            proj.indices.push(j);
            proj.eigenvalues.push(spectrum.eigenvalues[j]);
            proj.coefficients.push(a[(c, 0)]);
            proj.operators.push(spectrum.eigenoperators[j].clone());
        }
    }
    if proj.condition > CONDITION_WARN {
        proj.warning = Some(format!(
            "biorthogonalization condition number {:.3e} exceeds {CONDITION_WARN:.0e}",
            proj.condition
        ));
    }
    Ok(proj)
}
