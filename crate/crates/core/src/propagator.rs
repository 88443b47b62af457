//! Time-ordered evolution superoperators built from frozen-generator slices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, expm, gemm_into, CMatrix, ONE, ZERO};
use crate::model::LindbladModel;
use crate::superop::{liouvillian_matrix, SuperKind, Superoperator};

pub const DEFAULT_SLICES_PER_PERIOD: usize = 512;

// Slice exponentials are produced in batches of this size before being
// multiplied in time order, which bounds memory for large N.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Generator frozen at each slice midpoint; second order.
    #[default]
    Midpoint,
    /// Generator frozen at each slice's left endpoint; first order.
    Endpoint,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" | "midpoint-frozen-generator" => Ok(Scheme::Midpoint),
            "endpoint" | "endpoint-frozen-generator" => Ok(Scheme::Endpoint),
            other => Err(Error::Config(format!("unknown propagation scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub slices_per_period: usize,
    pub scheme: Scheme,
    pub t0: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            slices_per_period: DEFAULT_SLICES_PER_PERIOD,
            scheme: Scheme::Midpoint,
            t0: 0.0,
        }
    }
}

impl PropagatorConfig {
    pub fn with_slices(slices_per_period: usize) -> Self {
        PropagatorConfig {
            slices_per_period,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slices_per_period == 0 {
            return Err(Error::Config("slices_per_period must be at least 1".into()));
        }
        if !self.t0.is_finite() {
            return Err(Error::Config(format!("t0 must be finite, got {}", self.t0)));
        }
        Ok(())
    }
}

/// Splits t − t0 = m·T + τ with τ ∈ [0, T). Values of τ within a few ulps of
/// T are snapped to the next period.
pub fn stroboscopic_split(t0: f64, period: f64, t: f64) -> (u64, f64) {
    let span = t - t0;
    if span <= 0.0 {
        return (0, 0.0);
    }
    let mut m = (span / period).floor();
    let mut tau = span - m * period;
    let snap = 8.0 * f64::EPSILON * span.max(period);
    if tau >= period - snap {
        m += 1.0;
        tau = 0.0;
    } else if tau < snap {
        tau = 0.0;
    }
    (m as u64, tau.max(0.0))
}

fn check_interval(t0: f64, t: f64) -> Result<()> {
    if !t0.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("non-finite time interval [{t0}, {t}]")));
    }
    if t < t0 {
        return Err(Error::Domain(format!("final time {t} precedes initial time {t0}")));
    }
    Ok(())
}

/// Number of uniform slices covering `span` at nominal width T/slices_per_period.
fn slice_count(span: f64, period: f64, slices_per_period: usize) -> usize {
    let exact = span / period * slices_per_period as f64;
    let n = exact.ceil();
    // avoid an extra sliver when span is a whole number of nominal slices
    let n = if n - exact > 1.0 - 1e-9 { n - 1.0 } else { n };
    (n as usize).max(1)
}

fn frozen_time(scheme: Scheme, start: f64, h: f64, k: usize) -> f64 {
    match scheme {
        Scheme::Midpoint => start + (k as f64 + 0.5) * h,
        Scheme::Endpoint => start + k as f64 * h,
    }
}

/// Ordered product of `n` slice exponentials of width h starting at `start`.
/// `observe(k, U)` sees the partial product after slice k (1-based count).
fn slice_product(
    model: &LindbladModel,
    scheme: Scheme,
    start: f64,
    h: f64,
    n: usize,
    mut observe: impl FnMut(usize, &CMatrix),
) -> Result<CMatrix> {
    let d = model.dim() * model.dim();
    let mut u = CMatrix::identity(d, d);
    let mut tmp = CMatrix::zeros(d, d);
    let mut k0 = 0;
    while k0 < n {
        let k1 = (k0 + BATCH).min(n);
        let factors: Vec<CMatrix> = (k0..k1)
            .into_par_iter()
            .map(|k| {
                let tk = frozen_time(scheme, start, h, k);
                expm(&(liouvillian_matrix(model, tk) * linalg::C64::new(h, 0.0)))
            })
            .collect::<Result<_>>()?;
        for (i, f) in factors.iter().enumerate() {
            gemm_into(ONE, f, &u, ZERO, &mut tmp);
            std::mem::swap(&mut u, &mut tmp);
            observe(k0 + i + 1, &u);
        }
        k0 = k1;
    }
    Ok(u)
}

fn map(model: &LindbladModel, mat: CMatrix) -> Superoperator {
    Superoperator::new(model.dim(), mat, SuperKind::Map).expect("propagator has Liouville shape")
}

fn static_propagator(model: &LindbladModel, s: f64) -> Result<CMatrix> {
    expm(&(liouvillian_matrix(model, 0.0) * linalg::C64::new(s, 0.0)))
}

/// Propagation over [a, a+span] with no period folding.
fn propagate_direct(model: &LindbladModel, cfg: &PropagatorConfig, a: f64, span: f64) -> Result<CMatrix> {
    let d = model.dim() * model.dim();
    if span == 0.0 {
        return Ok(CMatrix::identity(d, d));
    }
    if model.is_static() {
        return static_propagator(model, span);
    }
    let n = slice_count(span, model.period(), cfg.slices_per_period);
    slice_product(model, cfg.scheme, a, span / n as f64, n, |_, _| {})
}

fn matrix_power(base: &CMatrix, mut m: u64) -> CMatrix {
    let d = base.nrows();
    let mut result = CMatrix::identity(d, d);
    let mut b = base.clone();
    let mut tmp = CMatrix::zeros(d, d);
    while m > 0 {
        if m & 1 == 1 {
            gemm_into(ONE, &b, &result, ZERO, &mut tmp);
            std::mem::swap(&mut result, &mut tmp);
        }
        m >>= 1;
        if m > 0 {
            gemm_into(ONE, &b, &b, ZERO, &mut tmp);
            std::mem::swap(&mut b, &mut tmp);
        }
    }
    result
}

/// U(t, t0). Intervals longer than a period are folded as
/// U(t0+τ, t0)·U_F^m using the periodicity of the generator.
pub fn propagate(model: &LindbladModel, cfg: &PropagatorConfig, t0: f64, t: f64) -> Result<Superoperator> {
    model.ensure_valid()?;
    cfg.validate()?;
    check_interval(t0, t)?;
    if model.is_static() {
        return Ok(map(model, propagate_direct(model, cfg, t0, t - t0)?));
    }
    let (m, tau) = stroboscopic_split(t0, model.period(), t);
    if m == 0 {
        return Ok(map(model, propagate_direct(model, cfg, t0, tau)?));
    }
    let uf = propagate_direct(model, cfg, t0, model.period())?;
    let mut u = matrix_power(&uf, m);
    if tau > 0.0 {
        u = linalg::matmul(&propagate_direct(model, cfg, t0, tau)?, &u);
    }
    Ok(map(model, u))
}

/// U_F = U(t0 + T, t0) with t0 taken from the configuration.
pub fn floquet_operator(model: &LindbladModel, cfg: &PropagatorConfig) -> Result<Superoperator> {
    model.ensure_valid()?;
    cfg.validate()?;
    Ok(map(model, propagate_direct(model, cfg, cfg.t0, model.period())?))
}

/// U_F together with the partial products U(t0 + jT/M, t0) for j = 0..M.
#[derive(Debug, Clone)]
pub struct SampledPeriod {
    pub times: Vec<f64>,
    pub maps: Vec<CMatrix>,
}

impl SampledPeriod {
    pub fn floquet(&self) -> &CMatrix {
        self.maps.last().expect("at least two samples")
    }
}

/// Builds U_F while recording M evenly spaced intermediate maps. For driven
/// models M must divide the slice count; the sample points then fall on slice
/// boundaries and the maps are exactly the partial products.
pub fn sample_period(model: &LindbladModel, cfg: &PropagatorConfig, samples: usize) -> Result<SampledPeriod> {
    model.ensure_valid()?;
    cfg.validate()?;
    if samples == 0 {
        return Err(Error::Config("need at least one sample per period".into()));
    }
    let period = model.period();
    let times: Vec<f64> = (0..=samples)
        .map(|j| cfg.t0 + period * j as f64 / samples as f64)
        .collect();
    let d = model.dim() * model.dim();
    if model.is_static() {
        let step = static_propagator(model, period / samples as f64)?;
        let mut maps = vec![CMatrix::identity(d, d)];
        for _ in 0..samples {
            let next = linalg::matmul(&step, maps.last().unwrap());
            maps.push(next);
        }
        return Ok(SampledPeriod { times, maps });
    }
    let n = cfg.slices_per_period;
    if !n.is_multiple_of(samples) {
        return Err(Error::Config(format!(
            "{samples} samples per period do not divide {n} slices"
        )));
    }
    let stride = n / samples;
    let mut maps = Vec::with_capacity(samples + 1);
    maps.push(CMatrix::identity(d, d));
    slice_product(model, cfg.scheme, cfg.t0, period / n as f64, n, |k, u| {
        if k % stride == 0 {
            maps.push(u.clone());
        }
    })?;
    Ok(SampledPeriod { times, maps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RichardsonEstimate {
    pub coarse_slices: usize,
    pub fine_slices: usize,
    /// Operator 2-norm of U_coarse − U_fine.
    pub estimate: f64,
}

/// Step-size error estimate from a second propagation with doubled slices.
pub fn richardson_check(
    model: &LindbladModel,
    cfg: &PropagatorConfig,
    t0: f64,
    t: f64,
) -> Result<RichardsonEstimate> {
    let coarse = propagate(model, cfg, t0, t)?;
    let fine_cfg = PropagatorConfig {
        slices_per_period: cfg.slices_per_period * 2,
        ..*cfg
    };
    let fine = propagate(model, &fine_cfg, t0, t)?;
    Ok(RichardsonEstimate {
        coarse_slices: cfg.slices_per_period,
        fine_slices: fine_cfg.slices_per_period,
        estimate: linalg::op_norm(&(coarse.mat() - fine.mat())),
    })
}
