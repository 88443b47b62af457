//! C interface to the floquet-lindblad engine.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_from_json` or `*_compute` call and released by the matching `*_free`.
//! Fallible calls return an [`FlStatus`]; the message of the most recent
//! failure on the calling thread is available from [`fl_last_error`].
//! Panics never unwind into C: they are caught and reported as
//! `FL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use floquet_lindblad::linalg::C64;
use floquet_lindblad::model::LindbladModel;
use floquet_lindblad::optics::{self, OpticalResponse, TwoBandModel};
use floquet_lindblad::propagator::{floquet_operator, PropagatorConfig};
use floquet_lindblad::spectral::{decompose, extract_ness, FloquetSpectrum, SpectralClass};
use floquet_lindblad::Error;

/// Status codes. Values 2 to 7 coincide with the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullArgument = 1,
    Config = 2,
    Parse = 3,
    Validation = 4,
    Numerical = 5,
    Io = 7,
    BufferTooSmall = 8,
    IndexOutOfRange = 9,
    InvalidUtf8 = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlSpectralClass {
    Transient = 0,
    NonDecaying = 1,
    Steady = 2,
    Growing = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlComplex {
    pub re: f64,
    pub im: f64,
}

/// Response of one k-point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlKResponse {
    pub k: f64,
    pub weight: f64,
    pub sigma: [f64; 3],
    pub j_dc: f64,
    pub j_shg: FlComplex,
    pub j_linear: FlComplex,
}

/// A validated Lindblad model.
pub struct FlModel(LindbladModel);

/// Floquet spectrum of a model's one-period map.
pub struct FlSpectrum(FloquetSpectrum);

/// A two-band k-grid.
pub struct FlBand(TwoBandModel);

/// Result of an optics sweep.
pub struct FlOptics(OpticalResponse);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FlStatus {
    match floquet_lindblad::cli::exit_code(e) {
        2 => FlStatus::Config,
        3 => FlStatus::Parse,
        4 => FlStatus::Validation,
        7 => FlStatus::Io,
        _ => FlStatus::Numerical,
    }
}

fn fail(status: FlStatus, msg: impl Into<String>) -> FlStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FlStatus>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(FlStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn engine<T>(r: floquet_lindblad::Result<T>) -> Result<T, FlStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, FlStatus> {
    if s.is_null() {
        return Err(fail(FlStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(FlStatus::InvalidUtf8, format!("argument is not UTF-8: {e}")))
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, FlStatus> {
    p.as_ref().ok_or_else(|| fail(FlStatus::NullArgument, "null handle"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), FlStatus> {
    if out.is_null() {
        return Err(fail(FlStatus::NullArgument, "null output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), FlStatus> {
    if out.is_null() {
        return Err(fail(FlStatus::NullArgument, "null output pointer"));
    }
    *out = value;
    Ok(())
}

fn propagator(slices: usize) -> PropagatorConfig {
    if slices == 0 {
        PropagatorConfig::default()
    } else {
        PropagatorConfig::with_slices(slices)
    }
}

fn complex(z: C64) -> FlComplex {
    FlComplex { re: z.re, im: z.im }
}

/// NUL-terminated version string with static lifetime.
#[no_mangle]
pub extern "C" fn fl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length
/// plus one, so a caller can size a buffer with `fl_last_error(NULL, 0)`.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Parses and validates a model document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_model_from_json(json: *const c_char, out: *mut *mut FlModel) -> FlStatus {
    guard(|| {
        let model = engine(LindbladModel::from_json(text(json)?))?;
        store(out, FlModel(model))
    })
}

/// # Safety
/// `model` must be null or a pointer returned by `fl_model_from_json`.
#[no_mangle]
pub unsafe extern "C" fn fl_model_free(model: *mut FlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Hilbert-space dimension, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn fl_model_dim(model: *const FlModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// Spectrum of the one-period map. `slices` of 0 selects the default.
///
/// # Safety
/// `model` must be a live model handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_spectrum_compute(
    model: *const FlModel,
    slices: usize,
    out: *mut *mut FlSpectrum,
) -> FlStatus {
    guard(|| {
        let m = &borrow(model)?.0;
        let uf = engine(floquet_operator(m, &propagator(slices)))?;
        store(out, FlSpectrum(engine(decompose(&uf))?))
    })
}

/// # Safety
/// `spectrum` must be null or a pointer returned by `fl_spectrum_compute`.
#[no_mangle]
pub unsafe extern "C" fn fl_spectrum_free(spectrum: *mut FlSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of eigenvalues, 0 for a null handle.
///
/// # Safety
/// `spectrum` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn fl_spectrum_len(spectrum: *const FlSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// Eigenvalue `index` and its class. Eigenvalues are ordered by decreasing
/// modulus. `class` may be null.
///
/// # Safety
/// `spectrum` must be a live handle; `value` writable; `class` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fl_spectrum_eigenvalue(
    spectrum: *const FlSpectrum,
    index: usize,
    value: *mut FlComplex,
    class: *mut FlSpectralClass,
) -> FlStatus {
    guard(|| {
        let s = &borrow(spectrum)?.0;
        let Some(&q) = s.eigenvalues.get(index) else {
            return Err(fail(
                FlStatus::IndexOutOfRange,
                format!("eigenvalue index {index} out of range for {}", s.len()),
            ));
        };
        write(value, complex(q))?;
        if !class.is_null() {
            *class = match s.classes[index] {
                SpectralClass::Transient => FlSpectralClass::Transient,
                SpectralClass::NonDecaying => FlSpectralClass::NonDecaying,
                SpectralClass::Steady => FlSpectralClass::Steady,
                SpectralClass::Growing => FlSpectralClass::Growing,
            };
        }
        Ok(())
    })
}

/// Periodic steady state at the start of the period, written row-major into
/// `rho` (dim × dim entries). `slices` of 0 selects the default.
///
/// # Safety
/// `model` must be a live handle; `rho` must be valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn fl_ness_compute(
    model: *const FlModel,
    slices: usize,
    rho: *mut FlComplex,
    len: usize,
) -> FlStatus {
    guard(|| {
        let m = &borrow(model)?.0;
        let n = m.dim();
        if rho.is_null() {
            return Err(fail(FlStatus::NullArgument, "null output buffer"));
        }
        if len < n * n {
            return Err(fail(
                FlStatus::BufferTooSmall,
                format!("steady state needs {} entries, buffer holds {len}", n * n),
            ));
        }
        let cfg = propagator(slices);
        let uf = engine(floquet_operator(m, &cfg))?;
        let spectrum = engine(decompose(&uf))?;
        let ness = engine(extract_ness(&spectrum, &uf, m, &cfg))?;
        let out = std::slice::from_raw_parts_mut(rho, n * n);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = complex(ness.rho0.mat()[(i, j)]);
            }
        }
        Ok(())
    })
}

/// Parses and validates a two-band document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_band_from_json(json: *const c_char, out: *mut *mut FlBand) -> FlStatus {
    guard(|| {
        let band = engine(TwoBandModel::from_json(text(json)?))?;
        engine(band.validate())?;
        store(out, FlBand(band))
    })
}

/// # Safety
/// `band` must be null or a pointer returned by `fl_band_from_json`.
#[no_mangle]
pub unsafe extern "C" fn fl_band_free(band: *mut FlBand) {
    if !band.is_null() {
        drop(Box::from_raw(band));
    }
}

/// # Safety
/// `band` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_optics_sweep(band: *const FlBand, out: *mut *mut FlOptics) -> FlStatus {
    guard(|| {
        let b = &borrow(band)?.0;
        store(out, FlOptics(engine(optics::sweep(b))?))
    })
}

/// # Safety
/// `optics` must be null or a pointer returned by `fl_optics_sweep`.
#[no_mangle]
pub unsafe extern "C" fn fl_optics_free(optics: *mut FlOptics) {
    if !optics.is_null() {
        drop(Box::from_raw(optics));
    }
}

/// Number of k-points, 0 for a null handle.
///
/// # Safety
/// `optics` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_optics_len(optics: *const FlOptics) -> usize {
    optics.as_ref().map_or(0, |o| o.0.per_k.len())
}

/// Weighted totals. Any output pointer may be null.
///
/// # Safety
/// `optics` must be a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn fl_optics_totals(
    optics: *const FlOptics,
    dc: *mut f64,
    shg: *mut FlComplex,
    linear: *mut FlComplex,
) -> FlStatus {
    guard(|| {
        let o = &borrow(optics)?.0;
        if !dc.is_null() {
            *dc = o.total_dc;
        }
        if !shg.is_null() {
            *shg = complex(o.total_shg);
        }
        if !linear.is_null() {
            *linear = complex(o.total_linear);
        }
        Ok(())
    })
}

/// # Safety
/// `optics` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_optics_point(optics: *const FlOptics, index: usize, out: *mut FlKResponse) -> FlStatus {
    guard(|| {
        let o = &borrow(optics)?.0;
        let Some(r) = o.per_k.get(index) else {
            return Err(fail(
                FlStatus::IndexOutOfRange,
                format!("k index {index} out of range for {}", o.per_k.len()),
            ));
        };
        write(
            out,
            FlKResponse {
                k: r.k,
                weight: r.weight,
                sigma: r.sigma,
                j_dc: r.j_dc,
                j_shg: complex(r.j_shg),
                j_linear: complex(r.j_linear),
            },
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_catches_panics() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, FlStatus::Panic);
        let mut buf = [0 as c_char; 64];
        let n = unsafe { fl_last_error(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert_eq!(msg, "internal panic: boom");
        assert_eq!(n, msg.len() + 1);
    }

    #[test]
    fn status_codes_follow_exit_codes() {
        assert_eq!(status_of(&Error::Parse("x".into())), FlStatus::Parse);
        assert_eq!(status_of(&Error::Unsupported("x".into())), FlStatus::Config);
        assert_eq!(status_of(&Error::Domain("x".into())), FlStatus::Numerical);
        let wrapped = Error::KPoint { index: 0, k: 0.0, source: Box::new(Error::ModelData("x".into())) };
        assert_eq!(status_of(&wrapped), FlStatus::Validation);
    }
}
