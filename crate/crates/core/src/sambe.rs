//! Extended-space (Sambe / Shirley-Floquet) solvers.
//!
//! Harmonic blocks are ordered l = −L..L. For the Hamiltonian the block
//! (l, l') is h^{(l−l')} − lΩ δ_{ll'}. For eigenmodes ϱ(t) = Σ_l ϱ^{(l)} e^{−ilΩt}
//! the Liouville block (l, l') is the commutator superoperator of h^{(l−l')}
//! plus δ_{ll'}(ilΩ + D), with D the (static) dissipator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};
use crate::model::{Jump, LindbladModel};
use crate::superop::{commutator_superop, dissipator_superop, unvectorize};

/// Modes with more than this fraction of their weight on the outermost
/// harmonic blocks are flagged as unconverged.
pub const EDGE_WEIGHT_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SambeMode {
    #[default]
    Full,
    Rwa,
}

impl std::str::FromStr for SambeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SambeMode::Full),
            "rwa" => Ok(SambeMode::Rwa),
            other => Err(Error::Config(format!("unknown Sambe mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SambeConfig {
    pub cutoff: usize,
    pub mode: SambeMode,
}

impl SambeConfig {
    pub fn full(cutoff: usize) -> Self {
        SambeConfig {
            cutoff,
            mode: SambeMode::Full,
        }
    }

    pub fn rwa() -> Self {
        SambeConfig {
            cutoff: 0,
            mode: SambeMode::Rwa,
        }
    }

    fn blocks(&self) -> usize {
        2 * self.cutoff + 1
    }

    fn check_harmonics(&self, model: &LindbladModel) -> Result<()> {
        let needed = model.max_harmonic() as usize;
        if self.mode == SambeMode::Full && self.cutoff < needed {
            return Err(Error::Config(format!(
                "cutoff {} is below the model's highest harmonic {needed}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfHamiltonian {
    pub mat: CMatrix,
    pub omega: f64,
    pub cutoff: usize,
    pub dim: usize,
    pub mode: SambeMode,
}

impl SfHamiltonian {
    /// Block (l, l'), both in −L..=L.
    pub fn block(&self, l: i32, lp: i32) -> CMatrix {
        let n = self.dim;
        let (r, c) = (block_index(l, self.cutoff), block_index(lp, self.cutoff));
        self.mat.view((r * n, c * n), (n, n)).clone_owned()
    }
}

fn block_index(l: i32, cutoff: usize) -> usize {
    (l + cutoff as i32) as usize
}

fn harmonics(cutoff: usize) -> impl Iterator<Item = i32> {
    let l = cutoff as i32;
    -l..=l
}

/// Shirley-Floquet Hamiltonian over the harmonic window, or the 2×2 resonant
/// block in RWA mode.
pub fn build_sf_hamiltonian(model: &LindbladModel, cfg: &SambeConfig) -> Result<SfHamiltonian> {
    model.ensure_valid()?;
    if cfg.mode == SambeMode::Rwa {
        let r = rwa_reduce(model)?;
        return Ok(SfHamiltonian {
            mat: r.h_sf,
            omega: model.omega(),
            cutoff: 0,
            dim: 2,
            mode: SambeMode::Rwa,
        });
    }
    cfg.check_harmonics(model)?;
    let n = model.dim();
    let b = cfg.blocks();
    let omega = model.omega();
    let mut mat = CMatrix::zeros(b * n, b * n);
    for l in harmonics(cfg.cutoff) {
        for lp in harmonics(cfg.cutoff) {
            let mut blk = model.harmonic(l - lp);
            if l == lp {
                for i in 0..n {
                    blk[(i, i)] -= C64::new(l as f64 * omega, 0.0);
                }
            }
            let (r, c) = (block_index(l, cfg.cutoff), block_index(lp, cfg.cutoff));
            mat.view_mut((r * n, c * n), (n, n)).copy_from(&blk);
        }
    }
    Ok(SfHamiltonian {
        mat,
        omega,
        cutoff: cfg.cutoff,
        dim: n,
        mode: SambeMode::Full,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiEnergy {
    pub epsilon: f64,
    /// Coefficients a^{(l)}_k, harmonic-major.
    pub vector: CVector,
    /// Weight on the outermost harmonic blocks.
    pub edge_weight: f64,
    pub converged: bool,
}

/// Eigenpairs of the truncated Shirley-Floquet Hamiltonian, ascending.
pub fn sf_quasienergies(sf: &SfHamiltonian) -> Result<Vec<QuasiEnergy>> {
    let herm = linalg::hermitian_part(&sf.mat);
    let eig = herm.symmetric_eigen();
    let n = sf.dim;
    let b = sf.mat.nrows() / n;
    let mut out: Vec<QuasiEnergy> = (0..eig.eigenvalues.len())
        .map(|j| {
            let v = eig.eigenvectors.column(j).clone_owned();
            let edge_weight = if sf.mode == SambeMode::Rwa || b == 1 {
                0.0
            } else {
                let first: f64 = (0..n).map(|i| v[i].norm_sqr()).sum();
                let last: f64 = (0..n).map(|i| v[(b - 1) * n + i].norm_sqr()).sum();
                (first + last) / v.norm_squared()
            };
            QuasiEnergy {
                epsilon: eig.eigenvalues[j],
                vector: v,
                edge_weight,
                converged: edge_weight < EDGE_WEIGHT_LIMIT,
            }
        })
        .collect();
    out.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfEigenmode {
    pub lambda: C64,
    pub omega: f64,
    /// ϱ^{(l)} for each retained harmonic.
    pub blocks: BTreeMap<i32, CMatrix>,
    pub edge_weight: f64,
    pub converged: bool,
}

impl SfEigenmode {
    /// ϱ(t) = Σ_l ϱ^{(l)} e^{−ilΩt}.
    pub fn at(&self, t: f64) -> CMatrix {
        let n = self.blocks.values().next().map_or(0, |b| b.nrows());
        let mut out = CMatrix::zeros(n, n);
        for (&l, b) in &self.blocks {
            out += b * C64::from_polar(1.0, -(l as f64) * self.omega * t);
        }
        out
    }

    pub fn block(&self, l: i32) -> Option<&CMatrix> {
        self.blocks.get(&l)
    }
}

fn ensure_static_jumps(model: &LindbladModel) -> Result<()> {
    if !model.has_static_jumps() {
        return Err(Error::Unsupported(
            "time-periodic jump operators are not supported in the extended-space solver; \
             use the time-domain propagator"
                .into(),
        ));
    }
    Ok(())
}

fn static_dissipator(model: &LindbladModel) -> CMatrix {
    let d = model.dim() * model.dim();
    let mut m = CMatrix::zeros(d, d);
    for j in model.jumps() {
        m += dissipator_superop(&j.operator, j.rate);
    }
    m
}

/// The explicit-harmonic extended Liouville operator of dimension (2L+1)N².
pub fn sf_lindblad_matrix(model: &LindbladModel, cfg: &SambeConfig) -> Result<CMatrix> {
    model.ensure_valid()?;
    ensure_static_jumps(model)?;
    cfg.check_harmonics(model)?;
    if cfg.mode == SambeMode::Rwa {
        let r = rwa_reduce(model)?;
        let m = r.effective_model()?;
        return Ok(crate::superop::liouvillian_matrix(&m, 0.0));
    }
    let n2 = model.dim() * model.dim();
    let b = cfg.blocks();
    let omega = model.omega();
    let diss = static_dissipator(model);
    let mut mat = CMatrix::zeros(b * n2, b * n2);
    let comm: BTreeMap<i32, CMatrix> = model
        .h_fourier()
        .iter()
        .map(|(&l, h)| (l, commutator_superop(h)))
        .collect();
    for l in harmonics(cfg.cutoff) {
        for lp in harmonics(cfg.cutoff) {
            let r = block_index(l, cfg.cutoff) * n2;
            let c = block_index(lp, cfg.cutoff) * n2;
            let mut blk = comm.get(&(l - lp)).cloned().unwrap_or_else(|| CMatrix::zeros(n2, n2));
            if l == lp {
                blk += &diss;
                for i in 0..n2 {
                    blk[(i, i)] += C64::new(0.0, l as f64 * omega);
                }
            }
            if blk.iter().any(|z| *z != ZERO) {
                mat.view_mut((r, c), (n2, n2)).copy_from(&blk);
            }
        }
    }
    Ok(mat)
}

fn split_blocks(v: &CVector, n: usize, cfg: &SambeConfig) -> Result<BTreeMap<i32, CMatrix>> {
    let n2 = n * n;
    if cfg.mode == SambeMode::Rwa {
        // reduced unknowns ϱ₁₁⁽⁰⁾, ϱ₂₁⁽¹⁾, ϱ₁₂⁽⁻¹⁾, ϱ₂₂⁽⁰⁾ in column-stacked order
        let mut b0 = CMatrix::zeros(2, 2);
        let mut bp = CMatrix::zeros(2, 2);
        let mut bm = CMatrix::zeros(2, 2);
        b0[(0, 0)] = v[0];
        bp[(1, 0)] = v[1];
        bm[(0, 1)] = v[2];
        b0[(1, 1)] = v[3];
        return Ok(BTreeMap::from([(-1, bm), (0, b0), (1, bp)]));
    }
    harmonics(cfg.cutoff)
        .map(|l| {
            let start = block_index(l, cfg.cutoff) * n2;
            let part = CVector::from_column_slice(&v.as_slice()[start..start + n2]);
            Ok((l, unvectorize(&part, n)?))
        })
        .collect()
}

fn edge_weight(blocks: &BTreeMap<i32, CMatrix>, cfg: &SambeConfig, model: &LindbladModel) -> f64 {
    if cfg.mode == SambeMode::Rwa {
        return 0.0;
    }
    if cfg.cutoff == 0 {
        return if model.is_static() { 0.0 } else { 1.0 };
    }
    let l = cfg.cutoff as i32;
    let total: f64 = blocks.values().map(|b| b.norm_squared()).sum();
    if total == 0.0 {
        return 0.0;
    }
    (blocks[&-l].norm_squared() + blocks[&l].norm_squared()) / total
}

fn fix_mode_phase(blocks: &mut BTreeMap<i32, CMatrix>) {
    let reference = blocks[&0].clone();
    let mut fixed = reference.clone();
    linalg::fix_phase(&mut fixed);
    let ratio = reference
        .iter()
        .zip(fixed.iter())
        .find(|(a, _)| a.norm() > 0.0)
        .map(|(a, b)| b / a);
    if let Some(p) = ratio {
        for b in blocks.values_mut() {
            *b *= p;
        }
    }
}

/// All eigenmodes of the truncated extended Liouville operator. Modes have
/// unit total Frobenius norm with the phase of the l = 0 block fixed as in the
/// spectral module.
pub fn solve_sf_lindblad(model: &LindbladModel, cfg: &SambeConfig) -> Result<Vec<SfEigenmode>> {
    let mat = sf_lindblad_matrix(model, cfg)?;
    let eig = linalg::eig_general(&mat)?;
    let n = model.dim();
    let mut modes = Vec::with_capacity(eig.dim());
    for j in 0..eig.dim() {
        let v = eig.right.column(j).clone_owned();
        let mut blocks = split_blocks(&v, n, cfg)?;
        fix_mode_phase(&mut blocks);
        let w = edge_weight(&blocks, cfg, model);
        modes.push(SfEigenmode {
            lambda: eig.eigenvalues[j],
            omega: model.omega(),
            blocks,
            edge_weight: w,
            converged: w < EDGE_WEIGHT_LIMIT,
        });
    }
    modes.sort_by(|a, b| {
        b.lambda
            .re
            .total_cmp(&a.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    Ok(modes)
}

/// The λ = 0 mode normalized to Tr ϱ⁽⁰⁾ = 1. The trace functional on the
/// l = 0 block annihilates the truncated operator exactly, so one of its rows
/// is redundant and is replaced by the normalization condition.
pub fn sf_steady_state(model: &LindbladModel, cfg: &SambeConfig) -> Result<SfEigenmode> {
    let mat = sf_lindblad_matrix(model, cfg)?;
    let n = model.dim();
    let n2 = n * n;
    let d = mat.nrows();
    let offset = if cfg.mode == SambeMode::Rwa { 0 } else { cfg.cutoff * n2 };
    let mut a = mat.clone();
    let mut rhs = CMatrix::zeros(d, 1);
    a.row_mut(offset).fill(ZERO);
    for i in 0..n {
        a[(offset, offset + i + n * i)] = ONE;
    }
    rhs[(offset, 0)] = ONE;
    let x = linalg::solve(&a, &rhs).map_err(|_| {
        Error::DegenerateSteadySpace("extended operator has more than one stationary mode".into())
    })?;
    let v = CVector::from_column_slice(x.as_slice());
    let res = (&mat * &v).norm();
    let scale = mat.norm().max(1.0) * v.norm();
    if !res.is_finite() || res > 1e-8 * scale {
        return Err(Error::DegenerateSteadySpace(format!(
            "stationary solve is ill-conditioned (residual {res:.3e})"
        )));
    }
    let blocks = split_blocks(&v, n, cfg)?;
    let w = edge_weight(&blocks, cfg, model);
    Ok(SfEigenmode {
        lambda: ZERO,
        omega: model.omega(),
        blocks,
        edge_weight: w,
        converged: w < EDGE_WEIGHT_LIMIT,
    })
}

/// Resonant two-level reduction: keep a₁⁽⁻¹⁾ and a₂⁽⁰⁾.
#[derive(Debug, Clone, PartialEq)]
pub struct RwaReduction {
    /// [[h⁰₁₁ + Ω, h⁽⁻¹⁾₁₂], [h⁽¹⁾₂₁, h⁰₂₂]]
    pub h_sf: CMatrix,
    pub omega: f64,
    pub jumps: Vec<Jump>,
}

impl RwaReduction {
    /// The static two-level problem whose Liouvillian acts on the reduced
    /// unknowns (ϱ₁₁⁽⁰⁾, ϱ₁₂⁽⁻¹⁾, ϱ₂₁⁽¹⁾, ϱ₂₂⁽⁰⁾) arranged as a 2×2 matrix.
    pub fn effective_model(&self) -> Result<LindbladModel> {
        LindbladModel::constant(linalg::hermitian_part(&self.h_sf), self.jumps.clone(), self.omega)
    }

    /// Quasi-energy splitting of the reduced Hamiltonian.
    pub fn gap(&self) -> f64 {
        let d = self.h_sf[(0, 0)].re - self.h_sf[(1, 1)].re;
        (d * d + 4.0 * self.h_sf[(0, 1)].norm_sqr()).sqrt()
    }
}

pub fn rwa_reduce(model: &LindbladModel) -> Result<RwaReduction> {
    model.ensure_valid()?;
    if model.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "the resonant reduction needs a two-level model, got N = {}",
            model.dim()
        )));
    }
    if model.max_harmonic() > 1 {
        return Err(Error::Unsupported(
            "the resonant reduction needs a single-harmonic drive".into(),
        ));
    }
    ensure_static_jumps(model)?;
    let h0 = model.harmonic(0);
    let hp = model.harmonic(1);
    let hm = model.harmonic(-1);
    let omega = model.omega();
    let h_sf = CMatrix::from_row_slice(
        2,
        2,
        &[h0[(0, 0)] + omega, hm[(0, 1)], hp[(1, 0)], h0[(1, 1)]],
    );
    Ok(RwaReduction {
        h_sf,
        omega,
        jumps: model.jumps().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use crate::superop::elementary;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two_band(eps1: f64, eps2: f64, av21: C64, omega: f64, rate: f64) -> LindbladModel {
        // h⁽¹⁾ = [[0,0],[iAv₂₁,0]], h⁽⁻¹⁾ its adjoint
        let mut hp = CMatrix::zeros(2, 2);
        hp[(1, 0)] = I * av21;
        let h = BTreeMap::from([
            (0, CMatrix::from_diagonal(&nalgebra::dvector![c(eps1), c(eps2)])),
            (1, hp.clone()),
            (-1, hp.adjoint()),
        ]);
        let jumps = if rate > 0.0 {
            vec![Jump::new(elementary(2, 0, 1), rate)]
        } else {
            vec![]
        };
        LindbladModel::checked(2, omega, h, jumps).unwrap()
    }

    #[test]
    fn static_blocks_are_shifted_copies() {
        let h0 = CMatrix::from_diagonal(&nalgebra::dvector![c(0.0), c(0.7)]);
        let m = LindbladModel::constant(h0.clone(), vec![], 2.0).unwrap();
        let sf = build_sf_hamiltonian(&m, &SambeConfig::full(1)).unwrap();
        assert_eq!(sf.mat.nrows(), 6);
        let id = CMatrix::identity(2, 2);
        assert_eq!(sf.block(-1, -1), &h0 + &id * c(2.0));
        assert_eq!(sf.block(0, 0), h0);
        assert_eq!(sf.block(1, 1), &h0 - &id * c(2.0));
        assert_eq!(sf.block(1, 0), CMatrix::zeros(2, 2));
    }

    #[test]
    fn drive_sits_off_diagonal() {
        let m = two_band(0.0, 1.0, c(0.1), 1.0, 0.0);
        let sf = build_sf_hamiltonian(&m, &SambeConfig::full(1)).unwrap();
        assert_eq!(sf.block(1, 0), m.harmonic(1));
        assert_eq!(sf.block(0, 1), m.harmonic(-1));
        assert_eq!(sf.block(1, -1), CMatrix::zeros(2, 2));
        assert!(linalg::hermiticity_defect(&sf.mat) < 1e-15);
    }

    #[test]
    fn cutoff_below_harmonics_is_rejected() {
        let m = two_band(0.0, 1.0, c(0.1), 1.0, 0.2);
        assert!(matches!(build_sf_hamiltonian(&m, &SambeConfig::full(0)), Err(Error::Config(_))));
        assert!(matches!(solve_sf_lindblad(&m, &SambeConfig::full(0)), Err(Error::Config(_))));
    }

    #[test]
    fn rwa_block_and_gap() {
        let (eps1, eps2, omega) = (-0.4, 0.65, 1.0);
        let av21 = C64::new(0.03, 0.1);
        let m = two_band(eps1, eps2, av21, omega, 0.0);
        let r = rwa_reduce(&m).unwrap();
        assert_eq!(r.h_sf[(0, 0)], c(eps1 + omega));
        assert_eq!(r.h_sf[(1, 1)], c(eps2));
        assert!((r.h_sf[(1, 0)] - I * av21).norm() < 1e-15);
        assert!((r.h_sf[(0, 1)] - (I * av21).conj()).norm() < 1e-15);
        let delta = eps2 - eps1 - omega;
        let want = (delta * delta + 4.0 * av21.norm_sqr()).sqrt();
        assert!((r.gap() - want).abs() < 1e-14);
        let q = sf_quasienergies(&build_sf_hamiltonian(&m, &SambeConfig::rwa()).unwrap()).unwrap();
        assert!((q[1].epsilon - q[0].epsilon - want).abs() < 1e-12);

        let flat = rwa_reduce(&two_band(0.0, 1.0, ZERO, 1.0, 0.0)).unwrap();
        assert_eq!(flat.h_sf[(0, 1)], ZERO);
        assert_eq!(flat.h_sf[(1, 0)], ZERO);

        let three = LindbladModel::constant(CMatrix::identity(3, 3), vec![], 1.0).unwrap();
        assert!(matches!(rwa_reduce(&three), Err(Error::Unsupported(_))));
    }

    #[test]
    fn incommensurate_static_replicas() {
        let delta = 0.37;
        let omega = 1.0;
        let m = LindbladModel::constant(
            CMatrix::from_diagonal(&nalgebra::dvector![c(0.0), c(delta)]),
            vec![],
            omega,
        )
        .unwrap();
        let q = sf_quasienergies(&build_sf_hamiltonian(&m, &SambeConfig::full(1)).unwrap()).unwrap();
        let mut got: Vec<f64> = q.iter().map(|e| e.epsilon).collect();
        got.sort_by(f64::total_cmp);
        let mut want = vec![-1.0, -1.0 + delta, 0.0, delta, 1.0, 1.0 + delta];
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn interior_quasienergies_are_self_converged() {
        let m = two_band(0.0, 0.8, c(0.15), 1.0, 0.0);
        let q4 = sf_quasienergies(&build_sf_hamiltonian(&m, &SambeConfig::full(4)).unwrap()).unwrap();
        let q6 = sf_quasienergies(&build_sf_hamiltonian(&m, &SambeConfig::full(6)).unwrap()).unwrap();
        for e in q4.iter().filter(|e| e.epsilon.abs() < 1.0) {
            let best = q6.iter().map(|f| (f.epsilon - e.epsilon).abs()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "{} off by {best}", e.epsilon);
        }
    }

    #[test]
    fn static_cutoff_zero_is_the_liouvillian() {
        let h0 = CMatrix::from_row_slice(2, 2, &[c(0.3), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(-0.3)]);
        let m = LindbladModel::constant(h0, vec![Jump::new(elementary(2, 0, 1), 0.5)], 1.0).unwrap();
        let mat = sf_lindblad_matrix(&m, &SambeConfig::full(0)).unwrap();
        let l = crate::superop::build_liouvillian(&m, 0.0).unwrap();
        assert!((mat - l.mat()).norm() < 1e-15);
        let modes = solve_sf_lindblad(&m, &SambeConfig::full(0)).unwrap();
        assert!(modes.iter().all(|m| m.converged));
        assert!(modes[0].lambda.norm() < 1e-12);
    }

    #[test]
    fn stationary_mode_has_zero_eigenvalue_and_unit_trace() {
        let m = two_band(0.0, 1.1, c(0.2), 1.0, 0.3);
        let cfg = SambeConfig::full(3);
        let s = sf_steady_state(&m, &cfg).unwrap();
        assert!((linalg::trace(&s.blocks[&0]) - ONE).norm() < 1e-14);
        let modes = solve_sf_lindblad(&m, &cfg).unwrap();
        let zero = modes.iter().filter(|x| x.lambda.norm() < 1e-10).count();
        assert_eq!(zero, 1);
        assert!(s.converged);
    }

    #[test]
    fn replica_shift_moves_eigenvalue_by_omega() {
        let m = two_band(0.0, 1.1, c(0.2), 1.3, 0.3);
        let cfg = SambeConfig::full(6);
        let mat = sf_lindblad_matrix(&m, &cfg).unwrap();
        let s = sf_steady_state(&m, &cfg).unwrap();
        // shift blocks up by one harmonic: ϱ'⁽ˡ⁾ = ϱ⁽ˡ⁻¹⁾
        let n2 = 4;
        let mut v = CVector::zeros(mat.nrows());
        for (&l, b) in &s.blocks {
            if l < cfg.cutoff as i32 {
                let start = block_index(l + 1, cfg.cutoff) * n2;
                v.rows_mut(start, n2).copy_from_slice(b.as_slice());
            }
        }
        let lambda = C64::new(0.0, m.omega());
        let res = (&mat * &v - &v * lambda).norm() / v.norm();
        assert!(res < 1e-7, "replica residual {res}");
    }

    #[test]
    fn compact_form_oracle_agrees_on_the_middle_column() {
        // Toeplitz embedding ϱ_(l,l') = ϱ^{(l−l')} on the same window; the
        // (l, 0) blocks of −i[h_SF, ϱ] + D(ϱ) reproduce the explicit equations.
        let m = two_band(0.1, 0.9, C64::new(0.1, 0.05), 1.0, 0.4);
        let cfg = SambeConfig::full(3);
        let sf = build_sf_hamiltonian(&m, &cfg).unwrap();
        let modes = solve_sf_lindblad(&m, &cfg).unwrap();
        let n = 2;
        let b = cfg.blocks();
        let l_max = cfg.cutoff as i32;
        for mode in modes.iter().take(4) {
            let mut rho = CMatrix::zeros(b * n, b * n);
            for l in harmonics(cfg.cutoff) {
                for lp in harmonics(cfg.cutoff) {
                    if let Some(blk) = mode.blocks.get(&(l - lp)) {
                        let (r, c) = (block_index(l, cfg.cutoff), block_index(lp, cfg.cutoff));
                        rho.view_mut((r * n, c * n), (n, n)).copy_from(blk);
                    }
                }
            }
            let lj = m.jumps()[0].operator.clone();
            let big_l = linalg::kron(&CMatrix::identity(b, b), &lj);
            let ldl = big_l.adjoint() * &big_l;
            let rate = c(m.jumps()[0].rate);
            let compact = (&sf.mat * &rho - &rho * &sf.mat) * (-I)
                + (&big_l * &rho * big_l.adjoint() - (&ldl * &rho + &rho * &ldl) * c(0.5)) * rate;
            let lhs = &rho * mode.lambda;
            for l in -l_max..=l_max {
                let r = block_index(l, cfg.cutoff) * n;
                let c0 = block_index(0, cfg.cutoff) * n;
                let diff = compact.view((r, c0), (n, n)) - lhs.view((r, c0), (n, n));
                assert!(diff.norm() < 1e-10, "block ({l},0) differs by {}", diff.norm());
            }
        }
    }

    #[test]
    fn periodic_jumps_are_unsupported() {
        let mut jump = Jump::new(elementary(2, 0, 1), 1.0);
        jump.harmonics.insert(1, elementary(2, 0, 1));
        jump.harmonics.insert(-1, elementary(2, 0, 1));
        let m = LindbladModel::checked(2, 1.0, BTreeMap::from([(0, CMatrix::zeros(2, 2))]), vec![jump]).unwrap();
        assert!(matches!(solve_sf_lindblad(&m, &SambeConfig::full(2)), Err(Error::Unsupported(_))));
    }
}
