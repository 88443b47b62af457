//! Randomized property suite for the spectral structure of Floquet maps.
//!
//! A seeded ensemble of random driven Lindblad models is propagated over one
//! period; each member's Floquet map is decomposed and checked against the
//! structural guarantees of CPTP maps (conjugate pairing, traceless transients,
//! modulus bound, existence and physicality of a steady state, diagonalizable
//! unit circle) plus the stroboscopic approach to the non-decaying projection.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::model::{DensityMatrix, Jump, LindbladModel};
use crate::propagator::{sample_period, PropagatorConfig};
use crate::spectral::{
    decompose, extract_ness_from_samples, nondecaying_projection, FloquetSpectrum, NessOptions,
};
use crate::superop::{unvectorize, vectorize, SuperKind, Superoperator};

pub const DEFAULT_SEED: u64 = 20240611;
pub const DEFAULT_ENSEMBLE: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub size: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub max_jumps: usize,
    pub max_harmonics: u32,
    /// Fraction of members with no jumps at all.
    pub closed_fraction: f64,
    /// Random initial states per model for the convergence check.
    pub initial_states: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            size: DEFAULT_ENSEMBLE,
            seed: DEFAULT_SEED,
            dims: vec![2, 3, 4],
            max_jumps: 3,
            max_harmonics: 2,
            closed_fraction: 0.1,
            initial_states: 10,
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_complex(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| gaussian(rng) * scale)
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    linalg::hermitian_part(&random_complex(rng, n, scale))
}

/// Ginibre state G G† / Tr(G G†), full rank with probability one.
pub fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    let g = random_complex(rng, n, 1.0);
    let rho = linalg::hermitian_part(&(&g * g.adjoint()));
    let tr = linalg::trace(&rho).re;
    DensityMatrix::new(rho.unscale(tr)).expect("square by construction")
}

/// Random model with `harmonics` drive components and `jumps` static jumps.
pub fn random_model(
    rng: &mut impl Rng,
    dim: usize,
    harmonics: u32,
    jumps: usize,
) -> Result<LindbladModel> {
    let omega = rng.random_range(0.8..2.5);
    let mut h = BTreeMap::new();
    h.insert(0, random_hermitian(rng, dim, 0.5));
    for l in 1..=harmonics as i32 {
        let hl = random_complex(rng, dim, 0.3 / l as f64);
        h.insert(-l, hl.adjoint());
        h.insert(l, hl);
    }
    let jumps = (0..jumps)
        .map(|_| {
            let op = random_complex(rng, dim, 1.0 / (dim as f64).sqrt());
            Jump::new(op, rng.random_range(0.05..0.5))
        })
        .collect();
    LindbladModel::checked(dim, omega, h, jumps)
}

/// The seeded ensemble. Every member is driven; roughly `closed_fraction`
/// of them have no jumps.
pub fn random_ensemble(cfg: &EnsembleConfig) -> Result<Vec<LindbladModel>> {
    if cfg.dims.is_empty() || cfg.dims.contains(&0) || cfg.max_harmonics == 0 {
        return Err(Error::Config("ensemble needs nonzero dimensions and harmonics".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.size)
        .map(|i| {
            let dim = cfg.dims[i % cfg.dims.len()];
            let harmonics = rng.random_range(1..=cfg.max_harmonics);
            let jumps = if rng.random::<f64>() < cfg.closed_fraction || cfg.max_jumps == 0 {
                0
            } else {
                rng.random_range(1..=cfg.max_jumps)
            };
            random_model(&mut rng, dim, harmonics, jumps)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub description: &'static str,
    pub tolerance: f64,
    /// Largest observed value of the checked quantity.
    pub worst: f64,
    /// Ensemble index where `worst` was observed.
    pub worst_model: Option<usize>,
    pub evaluated: usize,
    pub failures: usize,
    pub notes: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str, description: &'static str, tolerance: f64) -> Self {
        CheckResult {
            name,
            description,
            tolerance,
            worst: 0.0,
            worst_model: None,
            evaluated: 0,
            failures: 0,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn margin(&self) -> f64 {
        self.tolerance - self.worst
    }

    fn record(&mut self, model: usize, value: f64) {
        self.evaluated += 1;
        if !(value <= self.worst) {
            self.worst = value;
            self.worst_model = Some(model);
        }
        if !(value <= self.tolerance) {
            self.failures += 1;
            if self.notes.len() < 5 {
                self.notes.push(format!("model {model}: {value:e}"));
            }
        }
    }

    fn fail(&mut self, model: usize, why: &str) {
        self.evaluated += 1;
        self.failures += 1;
        self.worst = f64::INFINITY;
        self.worst_model = Some(model);
        if self.notes.len() < 5 {
            self.notes.push(format!("model {model}: {why}"));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub ensemble_size: usize,
    pub closed_models: usize,
    pub slices_per_period: usize,
    pub checks: Vec<CheckResult>,
    pub elapsed_seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ensemble: {} models ({} closed), seed {}, {} slices/period, {:.2} s",
            self.ensemble_size, self.closed_models, self.seed, self.slices_per_period, self.elapsed_seconds
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<22} worst {:>10.3e}  tol {:.0e}  ({}/{} ok)  {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.tolerance,
                c.evaluated - c.failures,
                c.evaluated,
                c.description
            )?;
            for n in &c.notes {
                writeln!(f, "       {n}")?;
            }
        }
        Ok(())
    }
}

/// Lets tests tamper with each member's Floquet map before it is analysed.
pub type MapHook<'a> = &'a (dyn Fn(usize, Superoperator) -> Superoperator + Sync);

pub fn run_verify(cfg: &EnsembleConfig, prop: &PropagatorConfig) -> Result<VerifyReport> {
    run_verify_with(cfg, prop, None)
}

pub fn run_verify_with(
    cfg: &EnsembleConfig,
    prop: &PropagatorConfig,
    hook: Option<MapHook<'_>>,
) -> Result<VerifyReport> {
    prop.validate()?;
    let start = Instant::now();
    let models = random_ensemble(cfg)?;
    let mut checks = vec![
        CheckResult::new("pairing", "eigenvalues and eigenoperators pair under conjugation", 1e-8),
        CheckResult::new("traceless", "eigenoperators with q != 1 are traceless", 1e-8),
        CheckResult::new("trace_functional", "identity is a left fixed point of U_F", 1e-8),
        CheckResult::new("modulus_bound", "all |q| <= 1", 1e-8),
        CheckResult::new("unit_eigenvalue", "some eigenvalue within tolerance of 1", 1e-7),
        CheckResult::new("unit_circle_diagonal", "no Jordan deficiency on the unit circle", 0.0),
        CheckResult::new("ness_physical", "NESS Hermitian, unit trace, positive", 1e-8),
        CheckResult::new("ness_fixed_point", "NESS is a periodic fixed point", 1e-7),
        CheckResult::new("nondecaying_limit", "stroboscopic approach to the non-decaying part", 1e-6),
        CheckResult::new("closed_unit_circle", "closed members have all |q| = 1", 1e-8),
    ];
    let [pairing, traceless, functional, modulus, unit, diag, physical, fixed, limit, closed] =
        &mut checks[..]
    else {
        unreachable!()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let opts = NessOptions::default();
    let mut closed_models = 0;
    for (i, model) in models.iter().enumerate() {
        let n = model.dim();
        let samples = sample_period(model, prop, opts.samples)?;
        let mut uf = Superoperator::new(n, samples.floquet().clone(), SuperKind::Map)?;
        if let Some(h) = hook {
            uf = h(i, uf);
        }
        let u = uf.mat();

        functional.record(i, uf.trace_defect());
        let spectrum = match decompose(&uf) {
            Ok(s) => s,
            Err(e) => {
                let why = e.to_string();
                for c in [&mut *pairing, &mut *traceless, &mut *modulus, &mut *unit, &mut *diag, &mut *physical, &mut *fixed, &mut *limit] {
                    c.fail(i, &why);
                }
                continue;
            }
        };

        pairing.record(i, pairing_defect(&spectrum, u));
        traceless.record(i, traceless_defect(&spectrum));
        modulus.record(i, spectrum.max_modulus() - 1.0);
        let nearest = spectrum
            .eigenvalues
            .iter()
            .map(|q| (q - C64::new(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        unit.record(i, nearest);
        let deficient = spectrum
            .jordan
            .deficient()
            .filter(|c| c.on_unit_circle)
            .count();
        diag.record(i, deficient as f64);
        if model.is_closed() {
            closed_models += 1;
            let worst = spectrum
                .eigenvalues
                .iter()
                .map(|q| (q.norm() - 1.0).abs())
                .fold(0.0, f64::max);
            closed.record(i, worst);
        }

        let samples = if hook.is_some() {
            let mut s = samples;
            *s.maps.last_mut().expect("nonempty samples") = u.clone();
            s
        } else {
            samples
        };
        match extract_ness_from_samples(&spectrum, &samples, &opts) {
            Ok(ness) => {
                let c = ness.rho0.check();
                let herm = if c.hermiticity_defect <= 1e-10 { 0.0 } else { c.hermiticity_defect };
                let tr = (c.trace - C64::new(1.0, 0.0)).norm();
                let tr = if tr <= 1e-10 { 0.0 } else { tr };
                physical.record(i, herm.max(tr).max(-c.min_eigenvalue));
                fixed.record(i, ness.fixed_point_residual.max(ness.periodicity_defect()));
            }
            Err(e) => {
                physical.fail(i, &e.to_string());
                fixed.fail(i, &e.to_string());
            }
        }

        let q2 = spectrum.second_modulus();
        let m = periods_to_converge(q2, 1e-8);
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.initial_states {
            let rho = random_density(&mut rng, n);
            let proj = match nondecaying_projection(&spectrum, &uf, &rho) {
                Ok(p) => p,
                Err(e) => {
                    worst = f64::INFINITY;
                    limit.notes.push(format!("model {i}: {e}"));
                    break;
                }
            };
            let evolved = evolve_periods(u, &vectorize(rho.mat()), m);
            let evolved = unvectorize(&evolved, n)?;
            worst = worst.max((evolved - proj.at_period(m)).norm());
        }
        limit.record(i, worst);
    }

    Ok(VerifyReport {
        seed: cfg.seed,
        ensemble_size: models.len(),
        closed_models,
        slices_per_period: prop.slices_per_period,
        checks,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// m = max(1, ⌈log(target)/log|q₂|⌉); 1 when nothing decays.
pub fn periods_to_converge(q2: f64, target: f64) -> u64 {
    if q2 <= 0.0 || q2 < target {
        return 1;
    }
    if q2 >= 1.0 {
        return u64::MAX;
    }
    ((target.ln() / q2.ln() - 1e-9).ceil() as u64).max(1)
}

fn evolve_periods(u: &CMatrix, v: &CVector, m: u64) -> CVector {
    let mut v = v.clone();
    for _ in 0..m {
        v = u * v;
    }
    v
}

/// Worst of the eigenvalue-multiset and eigenoperator pairing defects.
fn pairing_defect(s: &FloquetSpectrum, u: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, q) in s.eigenvalues.iter().enumerate() {
        let nearest = s
            .eigenvalues
            .iter()
            .map(|p| (p - q.conj()).norm())
            .fold(f64::INFINITY, f64::min);
        let adj = vectorize(&s.eigenoperators[j].adjoint());
        let res = (u * &adj - adj * q.conj()).norm();
        worst = worst.max(nearest).max(res);
    }
    worst
}

fn traceless_defect(s: &FloquetSpectrum) -> f64 {
    s.eigenvalues
        .iter()
        .zip(&s.eigenoperators)
        .filter(|(q, _)| (*q - C64::new(1.0, 0.0)).norm() > s.tolerance.steady)
        .map(|(_, op)| linalg::trace(op).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_is_reproducible_and_mixed() {
        let cfg = EnsembleConfig { size: 30, ..Default::default() };
        let a = random_ensemble(&cfg).unwrap();
        let b = random_ensemble(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|m| m.validate().is_empty()));
        assert!(a.iter().any(|m| m.max_harmonic() == 2));
        assert!(a.iter().any(|m| m.max_harmonic() == 1));
        assert!(a.iter().any(|m| m.jumps().len() == 3));
    }

    #[test]
    fn convergence_periods() {
        assert_eq!(periods_to_converge(0.0, 1e-8), 1);
        assert_eq!(periods_to_converge(0.1, 1e-8), 8);
        assert_eq!(periods_to_converge(1e-9, 1e-8), 1);
    }

    #[test]
    fn random_states_are_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..5 {
            let c = random_density(&mut rng, n).check();
            assert!(c.hermiticity_defect < 1e-14 && (c.trace.re - 1.0).abs() < 1e-14 && c.min_eigenvalue > 0.0);
        }
    }

    #[test]
    fn small_suite_passes_and_negative_control_fails() {
        let cfg = EnsembleConfig { size: 6, initial_states: 2, ..Default::default() };
        let prop = PropagatorConfig::with_slices(128);
        let report = run_verify(&cfg, &prop).unwrap();
        assert!(report.passed(), "{report}");

        let inflate = |_: usize, uf: Superoperator| {
            Superoperator::new(uf.dim_hilbert(), uf.mat() * C64::new(1.01, 0.0), SuperKind::Map).unwrap()
        };
        let report = run_verify_with(&cfg, &prop, Some(&inflate)).unwrap();
        assert!(!report.check("modulus_bound").unwrap().passed());
        assert!(!report.passed());
    }
}
