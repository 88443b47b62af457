#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use floquet_lindblad::linalg::{self, CMatrix, C64};
use floquet_lindblad::model::{Jump, LindbladModel};
use floquet_lindblad::optics::{KPoint, RwaBlochData, TwoBandModel};
use floquet_lindblad::propagator::{floquet_operator, PropagatorConfig};
use floquet_lindblad::spectral::{decompose, extract_ness, Ness};
use floquet_lindblad::verify::{random_complex, random_hermitian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closed-form Bloch vector of the RWA steady state, written out directly
/// rather than through the 3×3 solve.
pub fn closed_form_sigma(d: [f64; 3], gamma: f64, gamma0: f64) -> [f64; 3] {
    let [dx, dy, dz] = d;
    let den = gamma * (8.0 * dx * dx + 8.0 * dy * dy + 16.0 * dz * dz + gamma * gamma);
    [
        4.0 * (4.0 * dx * dz + dy * gamma) * gamma0 / den,
        -4.0 * (-4.0 * dy * dz + dx * gamma) * gamma0 / den,
        (16.0 * dz * dz + gamma * gamma) * gamma0 / den,
    ]
}

pub fn bloch_from_rates(d: [f64; 3], gamma: f64, gamma0: f64) -> RwaBlochData {
    RwaBlochData {
        epsilon: 0.0,
        d,
        gamma1: (gamma + gamma0) / 2.0,
        gamma2: (gamma - gamma0) / 2.0,
    }
}

/// Density matrix from a Bloch vector, assembled entry by entry.
pub fn density(s: [f64; 3]) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c((1.0 + s[2]) / 2.0, 0.0),
            c(s[0] / 2.0, -s[1] / 2.0),
            c(s[0] / 2.0, s[1] / 2.0),
            c((1.0 - s[2]) / 2.0, 0.0),
        ],
    )
}

pub fn ness_of(model: &LindbladModel, cfg: &PropagatorConfig) -> Ness {
    let uf = floquet_operator(model, cfg).unwrap();
    let s = decompose(&uf).unwrap();
    extract_ness(&s, &uf, model, cfg).unwrap()
}

/// Single-harmonic driven model with `jumps` random jump operators.
pub fn driven_model(rng: &mut impl Rng, dim: usize, omega: f64, drive: f64, jumps: usize) -> LindbladModel {
    let mut h = BTreeMap::new();
    h.insert(0, random_hermitian(rng, dim, 0.5));
    let h1 = random_complex(rng, dim, drive);
    h.insert(-1, h1.adjoint());
    h.insert(1, h1);
    let jumps = (0..jumps)
        .map(|_| Jump::new(random_complex(rng, dim, 0.7), rng.random_range(0.1..0.5)))
        .collect();
    LindbladModel::checked(dim, omega, h, jumps).unwrap()
}

/// Random resonant-ish single-k problem.
pub fn random_point(rng: &mut impl Rng) -> TwoBandModel {
    let omega = rng.random_range(0.5..2.0);
    let gap = omega * rng.random_range(0.7..1.3);
    let v12 = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let d12 = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let v0 = CMatrix::from_row_slice(
        2,
        2,
        &[c(rng.random_range(-1.0..1.0), 0.0), v12, v12.conj(), c(rng.random_range(-1.0..1.0), 0.0)],
    );
    let dv = CMatrix::from_row_slice(
        2,
        2,
        &[c(rng.random_range(-1.0..1.0), 0.0), d12, d12.conj(), c(rng.random_range(-1.0..1.0), 0.0)],
    );
    let beta = if rng.random::<bool>() { f64::INFINITY } else { rng.random_range(1.0..30.0) / gap };
    TwoBandModel {
        omega,
        amplitude: c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)),
        gamma0: rng.random_range(0.02..0.5),
        beta,
        k_points: vec![KPoint {
            k: 0.0,
            weight: None,
            eps1: -gap / 2.0,
            eps2: gap / 2.0,
            v0,
            dv_dk: dv,
        }],
    }
}

fn band_point(k: f64, odd: bool) -> KPoint {
    let (s, co) = k.sin_cos();
    let (s2, c2) = (2.0 * k).sin_cos();
    let e = 0.5 + 0.15 * co;
    let even = if odd { 0.0 } else { 1.0 };
    let v12 = c(0.25 * s + 0.2 * even * co, 0.1 * s2);
    let d12 = c(0.25 * co - 0.2 * even * s, 0.2 * c2);
    KPoint {
        k,
        weight: None,
        eps1: -e,
        eps2: e,
        v0: CMatrix::from_row_slice(
            2,
            2,
            &[c(0.4 * s + 0.1 * even, 0.0), v12, v12.conj(), c(-0.3 * s - 0.05 * even, 0.0)],
        ),
        dv_dk: CMatrix::from_row_slice(2, 2, &[c(0.4 * co, 0.0), d12, d12.conj(), c(-0.3 * co, 0.0)]),
    }
}

/// Smooth two-band model on a uniform midpoint grid of the zone.
pub fn smooth_band(n: usize, odd: bool) -> TwoBandModel {
    let h = 2.0 * PI / n as f64;
    TwoBandModel {
        omega: 1.0,
        amplitude: c(0.05, 0.0),
        gamma0: 0.1,
        beta: 20.0,
        k_points: (0..n).map(|j| band_point(-PI + (j as f64 + 0.5) * h, odd)).collect(),
    }
}

/// Odd-velocity model on an explicitly mirrored grid (k and −k adjacent).
pub fn mirrored_odd_band(pairs: usize) -> TwoBandModel {
    let h = PI / pairs as f64;
    let mut pts = Vec::new();
    for j in 0..pairs {
        let k = (j as f64 + 0.5) * h;
        pts.push(band_point(-k, true));
        pts.push(band_point(k, true));
    }
    TwoBandModel { k_points: pts, ..smooth_band(2, true) }
}

/// c = (1/M) Σ_m J(t_m) e^{2iΩt_m}: the 2Ω bin of a forward FFT of the
/// current over one period of the time-domain steady state.
pub fn shg_from_trajectory(band: &TwoBandModel, index: usize, ness: &Ness) -> C64 {
    let samples = &ness.trajectory[..ness.trajectory.len() - 1];
    let m = samples.len();
    let mut signal: Vec<C64> = samples
        .iter()
        .map(|(t, rho)| linalg::trace(&(band.velocity_at(index, *t).unwrap() * rho.mat())))
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut signal);
    signal[m - 2] / m as f64
}
