//! C ABI over the rhlab kernel laboratory.
//!
//! Objects cross the boundary as opaque handles created by `rhlab_*_new` or
//! by an operation's out-parameter and released with the matching
//! `rhlab_*_free`. Every fallible call returns an [`RhlabStatus`]; on a
//! nonzero status the message is available from [`rhlab_last_error`] on the
//! same thread until the next failing call. Panics are caught at the boundary
//! and reported as [`RhlabStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use rhlab::cz::check_block;
use rhlab::kernel::{assemble, block_kernel, convolve, op_norm};
use rhlab::resolvent::{default_grid, resolvent_of, DEFAULT_MARGIN_TOL};
use rhlab::weak::weak_l1;
use rhlab::{ComplexKernel, Error, Kernel, Mode, Params, RawParams};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhlabStatus {
    Ok = 0,
    /// A null pointer, a too-small buffer or an out-of-range enum value.
    InvalidArgument = 1,
    /// Parameters rejected by validation.
    InvalidParams = 2,
    /// A numerical precondition failed (margin, aliasing, conditioning).
    Numerical = 3,
    /// A size or memory limit was hit.
    Resource = 4,
    Internal = 5,
    Panic = 6,
}

/// Scale selection of an assembled operator.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhlabMode {
    Full = 0,
    Gap = 1,
}

/// Which part of an assembled operator to return.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhlabPart {
    /// The full operator `H_M`.
    H = 0,
    /// The lower-band sum (gap mode).
    Minus = 1,
    /// The upper-band sum (gap mode).
    Plus = 2,
}

/// Building-block axiom report of one kernel at one scale.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhlabBlockReport {
    pub scale: u64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub l1: f64,
    /// l1 mass outside `[-s, s]`.
    pub overhang: f64,
    pub d_iii: f64,
    pub d_iv: f64,
    pub d_min: f64,
    pub worst_h: u64,
    pub mean_free: bool,
    pub supported: bool,
}

/// Validated parameter set.
pub struct RhlabParams {
    inner: Params,
}

/// Real kernel on the integers.
pub struct RhlabKernel {
    inner: Kernel,
}

/// Complex kernel on the integers.
pub struct RhlabComplexKernel {
    inner: ComplexKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(RhlabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParams(_) | Error::EmptyBand { .. } | Error::NotDyadic(_) | Error::OutsideUpperBand { .. } | Error::Ordering { .. } => {
                RhlabStatus::InvalidParams
            }
            Error::GridTooSmall { .. }
            | Error::MarginTooSmall { .. }
            | Error::Aliasing { .. }
            | Error::IllConditioned { .. }
            | Error::NotMeanFree { .. }
            | Error::GridDoesNotCover { .. } => RhlabStatus::Numerical,
            Error::Resource(_) => RhlabStatus::Resource,
            Error::Config { .. } | Error::Parse(_) | Error::Io(_) => RhlabStatus::InvalidArgument,
            Error::Internal(_) => RhlabStatus::Internal,
        };
        Failure(code, e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(RhlabStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RhlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RhlabStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            RhlabStatus::Panic
        }
    }
}

fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a handle from this library
    unsafe { p.as_ref() }.ok_or_else(|| invalid(&format!("{what} is null")))
}

fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    // SAFETY: `out` is non-null and points to writable storage per the contract
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn put_value<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    // SAFETY: as in `put`
    unsafe { *out = value };
    Ok(())
}

/// Version string of the library; static storage.
#[no_mangle]
pub extern "C" fn rhlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rhlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Validates `(alpha, delta, m, mode)` with the default `omega`,
/// `gamma_resc` and `c_split`.
#[no_mangle]
pub extern "C" fn rhlab_params_new(
    alpha: f64,
    delta: f64,
    m: u64,
    mode: RhlabMode,
    out: *mut *mut RhlabParams,
) -> RhlabStatus {
    guard(|| {
        let mode = match mode {
            RhlabMode::Full => Mode::Full,
            RhlabMode::Gap => Mode::Gap,
        };
        let inner = rhlab::validate(&RawParams::new(alpha, delta, m, mode))?;
        put(out, RhlabParams { inner })
    })
}

/// # Safety
/// `p` must be null or a handle from [`rhlab_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rhlab_params_free(p: *mut RhlabParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Copies the operator's dyadic scales into `out` (capacity `cap`) and
/// stores their number in `len`. With `out` null only `len` is written.
#[no_mangle]
pub extern "C" fn rhlab_params_scales(p: *const RhlabParams, out: *mut u64, cap: usize, len: *mut usize) -> RhlabStatus {
    guard(|| {
        let p = deref(p, "params")?;
        let scales = p.inner.scales();
        let s = scales.scales();
        put_value(len, s.len())?;
        if out.is_null() {
            return Ok(());
        }
        if cap < s.len() {
            return Err(invalid(&format!("buffer holds {cap} scales, need {}", s.len())));
        }
        // SAFETY: `out` has room for `cap >= s.len()` values
        unsafe { ptr::copy_nonoverlapping(s.as_ptr(), out, s.len()) };
        Ok(())
    })
}

/// Assembles `H_M` and returns the requested part.
#[no_mangle]
pub extern "C" fn rhlab_assemble(p: *const RhlabParams, part: RhlabPart, out: *mut *mut RhlabKernel) -> RhlabStatus {
    guard(|| {
        let p = deref(p, "params")?;
        let a = assemble(&p.inner)?;
        let k = match part {
            RhlabPart::H => a.h,
            RhlabPart::Minus => a.minus.ok_or_else(|| invalid("band parts need gap mode"))?,
            RhlabPart::Plus => a.plus.ok_or_else(|| invalid("band parts need gap mode"))?,
        };
        put(out, RhlabKernel { inner: k })
    })
}

/// The transform block of dyadic scale `s`; `first_scale` selects the
/// plateau cutoff instead of the annular one.
#[no_mangle]
pub extern "C" fn rhlab_block_kernel(
    p: *const RhlabParams,
    s: u64,
    first_scale: bool,
    out: *mut *mut RhlabKernel,
) -> RhlabStatus {
    guard(|| {
        let p = deref(p, "params")?;
        put(out, RhlabKernel { inner: block_kernel(s, &p.inner, first_scale)? })
    })
}

/// A kernel with `values[i]` at `base + i`.
#[no_mangle]
pub extern "C" fn rhlab_kernel_new(base: i64, values: *const f64, len: usize, out: *mut *mut RhlabKernel) -> RhlabStatus {
    guard(|| {
        let vals = if len == 0 {
            Vec::new()
        } else {
            if values.is_null() {
                return Err(invalid("values is null"));
            }
            // SAFETY: `values` points to `len` readable doubles
            unsafe { std::slice::from_raw_parts(values, len) }.to_vec()
        };
        put(out, RhlabKernel { inner: Kernel::new(base, vals) })
    })
}

/// # Safety
/// `k` must be null or a kernel handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rhlab_kernel_free(k: *mut RhlabKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// First stored index and number of stored values.
#[no_mangle]
pub extern "C" fn rhlab_kernel_window(k: *const RhlabKernel, base: *mut i64, len: *mut usize) -> RhlabStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        put_value(base, k.inner.base())?;
        put_value(len, k.inner.len())
    })
}

/// Copies the stored values into `out` (capacity `cap`).
#[no_mangle]
pub extern "C" fn rhlab_kernel_values(k: *const RhlabKernel, out: *mut f64, cap: usize) -> RhlabStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        let v = k.inner.values();
        if out.is_null() || cap < v.len() {
            return Err(invalid(&format!("buffer holds {cap} values, need {}", v.len())));
        }
        // SAFETY: `out` has room for `cap >= v.len()` values
        unsafe { ptr::copy_nonoverlapping(v.as_ptr(), out, v.len()) };
        Ok(())
    })
}

/// `K(x)`, zero outside the stored window (and for a null handle).
#[no_mangle]
pub extern "C" fn rhlab_kernel_get(k: *const RhlabKernel, x: i64) -> f64 {
    // SAFETY: null or a live handle
    unsafe { k.as_ref() }.map_or(0.0, |k| k.inner.get(x))
}

#[no_mangle]
pub extern "C" fn rhlab_convolve(a: *const RhlabKernel, b: *const RhlabKernel, out: *mut *mut RhlabKernel) -> RhlabStatus {
    guard(|| {
        let a = deref(a, "first kernel")?;
        let b = deref(b, "second kernel")?;
        put(out, RhlabKernel { inner: convolve(&a.inner, &b.inner)? })
    })
}

/// l2 operator norm of convolution by `k` (sup of the symbol modulus).
#[no_mangle]
pub extern "C" fn rhlab_op_norm(k: *const RhlabKernel, out: *mut f64) -> RhlabStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        put_value(out, op_norm(&k.inner))
    })
}

/// `sup_t t #{x : |K(x)| > t}`.
#[no_mangle]
pub extern "C" fn rhlab_weak_l1(k: *const RhlabKernel, out: *mut f64) -> RhlabStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        put_value(out, weak_l1(&k.inner))
    })
}

/// Building-block axioms of `k` at scale `s` with Hölder exponent `omega`.
#[no_mangle]
pub extern "C" fn rhlab_check_block(k: *const RhlabKernel, s: u64, omega: f64, out: *mut RhlabBlockReport) -> RhlabStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        if !s.is_power_of_two() || s < 2 {
            return Err(Failure::from(Error::NotDyadic(s)));
        }
        let r = check_block(&k.inner, s, omega, None);
        put_value(
            out,
            RhlabBlockReport {
                scale: r.scale,
                mean_re: r.mean.re,
                mean_im: r.mean.im,
                l1: r.l1,
                overhang: r.overhang,
                d_iii: r.d_iii,
                d_iv: r.d_iv,
                d_min: r.d_min,
                worst_h: r.worst_h,
                mean_free: r.pass_i,
                supported: r.pass_ii,
            },
        )
    })
}

/// Kernel of `(lambda + H_M)^-1` for `lambda = lambda_re + i lambda_im`.
#[no_mangle]
pub extern "C" fn rhlab_resolvent(
    p: *const RhlabParams,
    lambda_re: f64,
    lambda_im: f64,
    out: *mut *mut RhlabComplexKernel,
) -> RhlabStatus {
    guard(|| {
        let p = deref(p, "params")?;
        let h = assemble(&p.inner)?.h;
        let r = resolvent_of(
            Complex64::new(lambda_re, lambda_im),
            Complex64::new(1.0, 0.0),
            &h,
            default_grid(&h),
            DEFAULT_MARGIN_TOL,
        )?;
        put(out, RhlabComplexKernel { inner: r.kernel })
    })
}

/// # Safety
/// `k` must be null or a complex kernel handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rhlab_complex_kernel_free(k: *mut RhlabComplexKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

#[no_mangle]
pub extern "C" fn rhlab_complex_kernel_window(k: *const RhlabComplexKernel, base: *mut i64, len: *mut usize) -> RhlabStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        put_value(base, k.inner.base())?;
        put_value(len, k.inner.len())
    })
}

/// Copies real and imaginary parts into `re` and `im` (capacity `cap` each).
#[no_mangle]
pub extern "C" fn rhlab_complex_kernel_values(
    k: *const RhlabComplexKernel,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> RhlabStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        let v = k.inner.values();
        if re.is_null() || im.is_null() || cap < v.len() {
            return Err(invalid(&format!("buffers hold {cap} values, need {}", v.len())));
        }
        for (i, z) in v.iter().enumerate() {
            // SAFETY: both buffers have room for `cap >= v.len()` values
            unsafe {
                *re.add(i) = z.re;
                *im.add(i) = z.im;
            }
        }
        Ok(())
    })
}
