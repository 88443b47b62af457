//! Two-band optical response in the rotating-wave approximation.
//!
//! Each momentum point is an independent two-level system driven at Ω with
//! vector potential A(t) = iA e^{−iΩt} − iA* e^{iΩt} and coupled to a bosonic
//! bath through σ± jumps. Inside the RWA the steady state reduces to a 3×3
//! linear problem for the Bloch vector, from which the DC (shift) current and
//! the second-harmonic amplitude follow.

mod file;

pub use file::{BandFile, KPointEntry};

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Add;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, I, ZERO};
use crate::model::{Jump, LindbladModel};
use crate::superop::elementary;

/// Below this β·gap the Planck occupation is treated as divergent.
pub const MIN_BETA_GAP: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KPoint {
    pub k: f64,
    pub weight: Option<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub v0: CMatrix,
    pub dv_dk: CMatrix,
}

impl KPoint {
    pub fn gap(&self) -> f64 {
        self.eps2 - self.eps1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBandModel {
    pub omega: f64,
    /// Complex field amplitude A = E/Ω.
    pub amplitude: C64,
    pub gamma0: f64,
    /// Inverse temperature; `f64::INFINITY` for a zero-temperature bath.
    pub beta: f64,
    pub k_points: Vec<KPoint>,
}

impl TwoBandModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ModelData(msg));
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return bad(format!("omega must be positive, got {}", self.omega));
        }
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return bad(format!("gamma0 must be positive, got {}", self.gamma0));
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta must be positive or infinite, got {}", self.beta));
        }
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return bad("amplitude is not finite".into());
        }
        if self.k_points.is_empty() {
            return bad("k grid is empty".into());
        }
        let given = self.k_points.iter().filter(|p| p.weight.is_some()).count();
        if given != 0 && given != self.k_points.len() {
            return bad("either every k-point carries a weight or none does".into());
        }
        for (i, p) in self.k_points.iter().enumerate() {
            let ctx = |msg: &str| Error::ModelData(format!("k_points[{i}] (k = {}): {msg}", p.k));
            if p.v0.shape() != (2, 2) || p.dv_dk.shape() != (2, 2) {
                return Err(ctx("v0 and dv_dk must be 2x2"));
            }
            if !(p.k.is_finite()
                && p.eps1.is_finite()
                && p.eps2.is_finite()
                && linalg::is_finite(&p.v0)
                && linalg::is_finite(&p.dv_dk)
                && p.weight.is_none_or(f64::is_finite))
            {
                return Err(ctx("non-finite entry"));
            }
            if p.gap() <= 0.0 {
                return Err(ctx("eps2 must exceed eps1"));
            }
            if linalg::hermiticity_defect(&p.v0) > HERMITIAN_TOL {
                return Err(ctx("v0 is not Hermitian"));
            }
        }
        Ok(())
    }

    /// Integration weights: explicit ones if given, otherwise the uniform mean.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.k_points.len();
        self.k_points
            .iter()
            .map(|p| p.weight.unwrap_or(1.0 / n as f64))
            .collect()
    }

    pub fn point(&self, index: usize) -> Result<&KPoint> {
        self.k_points.get(index).ok_or_else(|| {
            Error::Domain(format!(
                "k index {index} out of range for a grid of {}",
                self.k_points.len()
            ))
        })
    }

    /// A(t) = iA e^{−iΩt} − iA* e^{iΩt}, a real signal.
    pub fn vector_potential(&self, t: f64) -> f64 {
        let ph = C64::from_polar(1.0, -self.omega * t);
        (I * self.amplitude * ph - I * self.amplitude.conj() * ph.conj()).re
    }

    /// Velocity operator v⁰ + A(t) ∂v⁰/∂k at one k-point.
    pub fn velocity_at(&self, index: usize, t: f64) -> Result<CMatrix> {
        let p = self.point(index)?;
        Ok(&p.v0 + p.dv_dk.scale(self.vector_potential(t)))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: BandFile = serde_json::from_str(text)?;
        f.into_model()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&BandFile::from_model(self))?)
    }
}

/// Bose occupation 1/(e^{β·gap} − 1), zero for infinite β.
pub fn planck_occupation(beta: f64, gap: f64) -> Result<f64> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::Domain(format!("energy gap must be positive, got {gap}")));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive or infinite, got {beta}")));
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    let x = beta * gap;
    if x < MIN_BETA_GAP {
        return Err(Error::Domain(format!(
            "beta*gap = {x:e} is below {MIN_BETA_GAP:e}; occupation diverges"
        )));
    }
    Ok(1.0 / x.exp_m1())
}

/// The RWA block εI + d·σ together with the bath rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaBlochData {
    pub epsilon: f64,
    pub d: [f64; 3],
    /// Emission rate (σ+ jump).
    pub gamma1: f64,
    /// Absorption rate (σ− jump).
    pub gamma2: f64,
}

impl RwaBlochData {
    pub fn gamma(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    pub fn gamma0_eff(&self) -> f64 {
        self.gamma1 - self.gamma2
    }

    pub fn g_matrix(&self) -> Matrix3<f64> {
        let [dx, dy, dz] = self.d;
        let g = self.gamma();
        Matrix3::new(
            -g / 2.0, -2.0 * dz, 2.0 * dy,
            2.0 * dz, -g / 2.0, -2.0 * dx,
            -2.0 * dy, 2.0 * dx, -g,
        )
    }

    pub fn hamiltonian(&self) -> CMatrix {
        let [dx, dy, dz] = self.d;
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(self.epsilon + dz, 0.0),
                C64::new(dx, -dy),
                C64::new(dx, dy),
                C64::new(self.epsilon - dz, 0.0),
            ],
        )
    }

    /// σ+ with rate Γ₁ and σ− with rate Γ₂.
    pub fn jumps(&self) -> Vec<Jump> {
        vec![
            Jump::new(elementary(2, 0, 1), self.gamma1),
            Jump::new(elementary(2, 1, 0), self.gamma2),
        ]
    }
}

pub fn rwa_bloch_data(model: &TwoBandModel, index: usize) -> Result<RwaBlochData> {
    let p = model.point(index)?;
    bloch_data(model, p)
}

fn bloch_data(model: &TwoBandModel, p: &KPoint) -> Result<RwaBlochData> {
    let n = planck_occupation(model.beta, p.gap())?;
    let off = -I * model.amplitude.conj() * p.v0[(0, 1)];
    Ok(RwaBlochData {
        epsilon: (p.eps1 + model.omega + p.eps2) / 2.0,
        d: [off.re, -off.im, (p.eps1 + model.omega - p.eps2) / 2.0],
        gamma1: model.gamma0 * (n + 1.0),
        gamma2: model.gamma0 * n,
    })
}

/// Steady Bloch vector ⟨σ⟩ = −G⁻¹b with b = (0, 0, Γ₁ − Γ₂).
pub fn solve_rwa_steady(data: &RwaBlochData) -> Result<[f64; 3]> {
    let g = data.gamma();
    if !(g > 0.0) {
        return Err(Error::DegenerateSteadySpace(format!(
            "total bath rate is {g}; the RWA Bloch equations have no unique fixed point, \
             use the spectral solver instead"
        )));
    }
    let b = Vector3::new(0.0, 0.0, data.gamma0_eff());
    let s = data.g_matrix().lu().solve(&b).ok_or_else(|| {
        Error::DegenerateSteadySpace("G matrix is singular; use the spectral solver".into())
    })?;
    Ok([-s[0], -s[1], -s[2]])
}

/// ½(I + ⟨σ⟩·σ) in the rotating frame.
pub fn rwa_density(sigma: [f64; 3]) -> CMatrix {
    crate::model::DensityMatrix::from_bloch(sigma).into_inner()
}

/// b₀ and b of v^RWA = b₀I + b·σ.
pub fn velocity_rwa_block(model: &TwoBandModel, index: usize) -> Result<(f64, [f64; 3])> {
    let v = velocity_rwa_matrix(model, index)?;
    let off = v[(0, 1)];
    Ok((
        ((v[(0, 0)] + v[(1, 1)]) / 2.0).re,
        [off.re, -off.im, ((v[(0, 0)] - v[(1, 1)]) / 2.0).re],
    ))
}

/// [[v⁰₁₁, −iA*(∂v)₁₂], [iA(∂v)₂₁, v⁰₂₂]], checked for Hermiticity.
pub fn velocity_rwa_matrix(model: &TwoBandModel, index: usize) -> Result<CMatrix> {
    velocity_matrix(model, model.point(index)?)
}

fn velocity_matrix(model: &TwoBandModel, p: &KPoint) -> Result<CMatrix> {
    let a = model.amplitude;
    let v = CMatrix::from_row_slice(
        2,
        2,
        &[
            p.v0[(0, 0)],
            -I * a.conj() * p.dv_dk[(0, 1)],
            I * a * p.dv_dk[(1, 0)],
            p.v0[(1, 1)],
        ],
    );
    let defect = linalg::hermiticity_defect(&v);
    if defect > HERMITIAN_TOL {
        return Err(Error::ModelData(format!(
            "RWA velocity block is not Hermitian (defect {defect:e})"
        )));
    }
    Ok(v)
}

pub fn j_dc(model: &TwoBandModel, index: usize) -> Result<f64> {
    Ok(point_response(model, model.point(index)?, 1.0)?.j_dc)
}

/// Amplitude c of the e^{−2iΩt} component; the signal is c e^{−2iΩt} + c.c.
pub fn j_shg(model: &TwoBandModel, index: usize) -> Result<C64> {
    Ok(point_response(model, model.point(index)?, 1.0)?.j_shg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KResponse {
    pub k: f64,
    pub weight: f64,
    pub sigma: [f64; 3],
    pub j_dc: f64,
    pub j_shg: C64,
    /// Amplitude of the e^{−iΩt} component.
    pub j_linear: C64,
}

fn point_response(model: &TwoBandModel, p: &KPoint, weight: f64) -> Result<KResponse> {
    let data = bloch_data(model, p)?;
    let sigma = solve_rwa_steady(&data)?;
    let v = velocity_matrix(model, p)?;
    let rho = rwa_density(sigma);

    let b0 = ((v[(0, 0)] + v[(1, 1)]) / 2.0).re;
    let b = [v[(0, 1)].re, -v[(0, 1)].im, ((v[(0, 0)] - v[(1, 1)]) / 2.0).re];
    let dc = b0 + b[0] * sigma[0] + b[1] * sigma[1] + b[2] * sigma[2];
    let tr = linalg::trace(&linalg::matmul(&v, &rho));
    let scale = 1.0 + v.camax();
    if tr.im.abs() > 1e-10 * scale || (tr.re - dc).abs() > 1e-12 * scale.max(1.0) * 10.0 {
        return Err(Error::Integrity(format!(
            "DC current mismatch: closed form {dc}, trace {tr}"
        )));
    }

    let a = model.amplitude;
    let rho21 = rho[(1, 0)];
    let rho12 = rho[(0, 1)];
    let shg = I * a * p.dv_dk[(0, 1)] * rho21;
    let conj_term = -I * a.conj() * p.dv_dk[(1, 0)] * rho12;
    if (conj_term - shg.conj()).norm() > 1e-10 * (1.0 + shg.norm()) {
        return Err(Error::ModelData(format!(
            "SHG conjugate term {conj_term} is not the conjugate of {shg}; dv_dk is not Hermitian"
        )));
    }
    let linear = p.v0[(0, 1)] * rho21 + I * a * (p.dv_dk[(0, 0)] * rho[(0, 0)] + p.dv_dk[(1, 1)] * rho[(1, 1)]);

    Ok(KResponse {
        k: p.k,
        weight,
        sigma,
        j_dc: dc,
        j_shg: shg,
        j_linear: linear,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpticsConfig {
    /// Reserved for higher-order field couplings; enabling it is an error.
    pub strong_field: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpticalResponse {
    pub beta: f64,
    pub per_k: Vec<KResponse>,
    pub total_dc: f64,
    pub total_shg: C64,
    pub total_linear: C64,
}

pub fn sweep(model: &TwoBandModel) -> Result<OpticalResponse> {
    sweep_with(model, &OpticsConfig::default())
}

pub fn sweep_with(model: &TwoBandModel, cfg: &OpticsConfig) -> Result<OpticalResponse> {
    if cfg.strong_field {
        return Err(Error::Unsupported(
            "strong-field couplings beyond linear order in A are not implemented".into(),
        ));
    }
    model.validate()?;
    let weights = model.weights();
    let results: Vec<Result<KResponse>> = model
        .k_points
        .par_iter()
        .zip(weights.par_iter())
        .map(|(p, &w)| point_response(model, p, w))
        .collect();
    let mut per_k = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        per_k.push(r.map_err(|e| Error::KPoint {
            index,
            k: model.k_points[index].k,
            source: Box::new(e),
        })?);
    }
    let dc: Vec<f64> = per_k.iter().map(|r| r.weight * r.j_dc).collect();
    let shg: Vec<C64> = per_k.iter().map(|r| r.j_shg.scale(r.weight)).collect();
    let lin: Vec<C64> = per_k.iter().map(|r| r.j_linear.scale(r.weight)).collect();
    Ok(OpticalResponse {
        beta: model.beta,
        total_dc: pairwise_sum(&dc),
        total_shg: pairwise_sum(&shg),
        total_linear: pairwise_sum(&lin),
        per_k,
    })
}

/// Order-fixed pairwise summation.
pub fn pairwise_sum<T: Copy + Default + Add<Output = T>>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::default(),
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Static rotating-frame model h_SF^RWA with the bath jumps, for cross-checks
/// against the general spectral solver.
pub fn effective_model(model: &TwoBandModel, index: usize) -> Result<LindbladModel> {
    let data = rwa_bloch_data(model, index)?;
    LindbladModel::constant(data.hamiltonian(), data.jumps(), model.omega)
}

/// Lab-frame model with the resonant part of the drive only:
/// H(t) = diag(ε₁, ε₂) + iAv₂₁ e^{−iΩt}|2⟩⟨1| + h.c.
///
/// Its periodic steady state is the RWA state rotated back,
/// ρ₂₁(t) = ρ₂₁^RWA e^{−iΩt}.
pub fn driven_rwa_model(model: &TwoBandModel, index: usize) -> Result<LindbladModel> {
    let p = model.point(index)?;
    let data = bloch_data(model, p)?;
    let h0 = CMatrix::from_row_slice(2, 2, &[C64::new(p.eps1, 0.0), ZERO, ZERO, C64::new(p.eps2, 0.0)]);
    let mut h1 = CMatrix::zeros(2, 2);
    h1[(1, 0)] = I * model.amplitude * p.v0[(1, 0)];
    let mut h = BTreeMap::new();
    h.insert(0, h0);
    h.insert(-1, h1.adjoint());
    h.insert(1, h1);
    LindbladModel::checked(2, model.omega, h, data.jumps())
}

/// Lab-frame model with the full linear coupling H⁰ + A(t)v⁰.
pub fn driven_full_model(model: &TwoBandModel, index: usize) -> Result<LindbladModel> {
    let p = model.point(index)?;
    let data = bloch_data(model, p)?;
    let h0 = CMatrix::from_row_slice(2, 2, &[C64::new(p.eps1, 0.0), ZERO, ZERO, C64::new(p.eps2, 0.0)]);
    let h1 = p.v0.map(|z| z * I * model.amplitude);
    let mut h = BTreeMap::new();
    h.insert(0, h0);
    h.insert(-1, h1.adjoint());
    h.insert(1, h1);
    LindbladModel::checked(2, model.omega, h, data.jumps())
}

fn fmt_beta(beta: f64) -> String {
    if beta.is_finite() {
        format!("{beta}")
    } else {
        "inf".into()
    }
}

/// CSV with one row per k-point and a `total` footer. With `linear` the
/// amplitude at Ω is appended as two extra columns.
pub fn write_optics_csv<W: Write>(resp: &OpticalResponse, linear: bool, mut out: W) -> Result<()> {
    writeln!(out, "# beta={}", fmt_beta(resp.beta))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k", "sigma_x", "sigma_y", "sigma_z", "j_dc", "re_j_shg", "im_j_shg"];
    if linear {
        header.extend(["re_j_lin", "im_j_lin"]);
    }
    w.write_record(&header)?;
    for r in &resp.per_k {
        let mut row = vec![
            r.k.to_string(),
            r.sigma[0].to_string(),
            r.sigma[1].to_string(),
            r.sigma[2].to_string(),
            r.j_dc.to_string(),
            r.j_shg.re.to_string(),
            r.j_shg.im.to_string(),
        ];
        if linear {
            row.extend([r.j_linear.re.to_string(), r.j_linear.im.to_string()]);
        }
        w.write_record(&row)?;
    }
    let mut footer = vec![
        "total".to_string(),
        String::new(),
        String::new(),
        String::new(),
        resp.total_dc.to_string(),
        resp.total_shg.re.to_string(),
        resp.total_shg.im.to_string(),
    ];
    if linear {
        footer.extend([resp.total_linear.re.to_string(), resp.total_linear.im.to_string()]);
    }
    w.write_record(&footer)?;
    w.flush()?;
    Ok(())
}

/// Single-point model helper used by tests and examples.
pub fn single_point(
    omega: f64,
    amplitude: C64,
    gamma0: f64,
    beta: f64,
    eps: (f64, f64),
    v0: CMatrix,
    dv_dk: CMatrix,
) -> TwoBandModel {
    TwoBandModel {
        omega,
        amplitude,
        gamma0,
        beta,
        k_points: vec![KPoint {
            k: 0.0,
            weight: None,
            eps1: eps.0,
            eps2: eps.1,
            v0,
            dv_dk,
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn m2(a: [C64; 4]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &a)
    }

    fn data(d: [f64; 3], g1: f64, g2: f64) -> RwaBlochData {
        RwaBlochData { epsilon: 0.0, d, gamma1: g1, gamma2: g2 }
    }

    #[test]
    fn planck_examples() {
        assert_eq!(planck_occupation(f64::INFINITY, 1.0).unwrap(), 0.0);
        assert!((planck_occupation(2f64.ln(), 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(planck_occupation(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(planck_occupation(1e-13, 1.0), Err(Error::Domain(_))));
        assert!(planck_occupation(1e-11, 1.0).unwrap() > 1e10);
    }

    #[test]
    fn bloch_data_examples() {
        let zero = CMatrix::zeros(2, 2);
        let v = m2([ZERO, c(0.3, 0.0), c(0.3, 0.0), ZERO]);
        let m = single_point(1.0, ZERO, 0.1, f64::INFINITY, (-0.2, 0.5), v.clone(), zero.clone());
        let d = rwa_bloch_data(&m, 0).unwrap();
        assert_eq!(d.d[0], 0.0);
        assert_eq!(d.d[1], 0.0);
        assert!((d.d[2] - 0.15).abs() < 1e-15);
        assert!((d.epsilon - 0.65).abs() < 1e-15);

        // resonance, and A·v21 = 0.1 real
        let v = m2([ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]);
        let m = single_point(1.0, c(0.1, 0.0), 0.1, f64::INFINITY, (-0.5, 0.5), v, zero);
        let d = rwa_bloch_data(&m, 0).unwrap();
        assert!(d.d[0].abs() < 1e-15 && (d.d[1] - 0.1).abs() < 1e-15 && d.d[2].abs() < 1e-15);
        let h = d.hamiltonian();
        assert!((h[(0, 1)] - c(0.0, -0.1)).norm() < 1e-15);
        assert!((h[(1, 0)] - c(0.0, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn steady_examples() {
        let s = solve_rwa_steady(&data([0.0; 3], 0.7, 0.2)).unwrap();
        assert!(s[0].abs() < 1e-15 && s[1].abs() < 1e-15);
        assert!((s[2] - 0.5 / 0.9).abs() < 1e-14);

        let s = solve_rwa_steady(&data([1.0, 0.0, 0.0], 1.0, 0.0)).unwrap();
        assert!(s[0].abs() < 1e-14);
        assert!((s[1] + 4.0 / 9.0).abs() < 1e-14);
        assert!((s[2] - 1.0 / 9.0).abs() < 1e-14);

        let s = solve_rwa_steady(&data([0.0; 3], 1.0, 0.0)).unwrap();
        assert_eq!(s, [0.0, 0.0, 1.0]);
        let rho = rwa_density(s);
        assert!((rho[(0, 0)] - ONE).norm() < 1e-15 && rho[(1, 1)].norm() < 1e-15);

        assert!(matches!(
            solve_rwa_steady(&data([1.0, 0.0, 0.0], 0.0, 0.0)),
            Err(Error::DegenerateSteadySpace(_))
        ));
    }

    #[test]
    fn velocity_block_examples() {
        let v0 = m2([c(0.4, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
        let mut dv = CMatrix::zeros(2, 2);
        let m = single_point(1.0, c(0.3, 0.0), 0.1, f64::INFINITY, (-0.5, 0.5), v0.clone(), dv.clone());
        let (b0, b) = velocity_rwa_block(&m, 0).unwrap();
        assert!((b0 - 0.4).abs() < 1e-15);
        assert_eq!(b, [0.0, 0.0, 0.0]);

        dv[(0, 1)] = ONE;
        dv[(1, 0)] = ONE;
        let m = single_point(1.0, c(0.3, 0.0), 0.1, f64::INFINITY, (-0.5, 0.5), v0, dv);
        let (_, b) = velocity_rwa_block(&m, 0).unwrap();
        assert!(b[0].abs() < 1e-15 && (b[1] - 0.3).abs() < 1e-15);

        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = ONE;
        let m = single_point(1.0, c(0.3, 0.0), 0.1, f64::INFINITY, (-0.5, 0.5), CMatrix::zeros(2, 2), bad);
        assert!(matches!(velocity_rwa_block(&m, 0), Err(Error::ModelData(_))));
    }

    #[test]
    fn dc_examples() {
        let zero = CMatrix::zeros(2, 2);
        let m = single_point(1.0, ZERO, 0.1, 5.0, (-0.5, 0.6), zero.clone(), zero.clone());
        assert_eq!(j_dc(&m, 0).unwrap(), 0.0);

        // b0 = 0, b = (0,0,1) needs v11 = 1, v22 = -1; pick eps/omega so d = (1,0,0).
        // d_x = Re(-i A* v12) = 1 with A = 1, v12 = i.
        let v0 = m2([ONE, I, -I, -ONE]);
        let m = single_point(1.0, ONE, 1.0, f64::INFINITY, (0.0, 1.0), v0, zero);
        let d = rwa_bloch_data(&m, 0).unwrap();
        assert!((d.d[0] - 1.0).abs() < 1e-15 && d.d[1].abs() < 1e-15 && d.d[2].abs() < 1e-15);
        assert!((j_dc(&m, 0).unwrap() - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn shg_vanishes_without_drive_or_gradient() {
        let v0 = m2([c(0.2, 0.0), c(0.3, 0.1), c(0.3, -0.1), c(-0.1, 0.0)]);
        let dv = m2([ZERO, c(0.5, 0.2), c(0.5, -0.2), ZERO]);
        let m = single_point(1.0, ZERO, 0.1, 3.0, (-0.5, 0.5), v0.clone(), dv);
        assert_eq!(j_shg(&m, 0).unwrap(), ZERO);
        let m = single_point(1.0, c(0.1, 0.05), 0.1, 3.0, (-0.5, 0.5), v0, CMatrix::zeros(2, 2));
        assert_eq!(j_shg(&m, 0).unwrap(), ZERO);
    }

    #[test]
    fn sweep_reports_offending_point() {
        let zero = CMatrix::zeros(2, 2);
        let mut m = single_point(1.0, c(0.1, 0.0), 0.1, 2.0, (-0.5, 0.5), zero.clone(), zero.clone());
        let mut p = m.k_points[0].clone();
        p.k = 0.25;
        p.dv_dk[(0, 1)] = ONE;
        m.k_points.push(p);
        match sweep(&m) {
            Err(Error::KPoint { index, k, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(k, 0.25);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_point_totals() {
        let v0 = m2([c(0.2, 0.0), c(0.3, 0.1), c(0.3, -0.1), c(-0.1, 0.0)]);
        let dv = m2([c(0.1, 0.0), c(0.5, 0.2), c(0.5, -0.2), ZERO]);
        let m = single_point(1.1, c(0.1, 0.05), 0.1, 3.0, (-0.5, 0.5), v0, dv);
        let r = sweep(&m).unwrap();
        assert_eq!(r.total_dc, r.per_k[0].j_dc);
        assert_eq!(r.total_shg, r.per_k[0].j_shg);
        assert!(sweep_with(&m, &OpticsConfig { strong_field: true }).is_err());
    }

    #[test]
    fn csv_layout() {
        let v0 = m2([c(0.2, 0.0), c(0.3, 0.1), c(0.3, -0.1), c(-0.1, 0.0)]);
        let m = single_point(1.1, c(0.1, 0.05), 0.1, f64::INFINITY, (-0.5, 0.5), v0, CMatrix::zeros(2, 2));
        let r = sweep(&m).unwrap();
        let mut buf = Vec::new();
        write_optics_csv(&r, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# beta=inf");
        assert_eq!(lines[1], "k,sigma_x,sigma_y,sigma_z,j_dc,re_j_shg,im_j_shg");
        assert!(lines[3].starts_with("total,,,,"));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }
}
