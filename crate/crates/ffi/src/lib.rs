//! C interface to the liouville-q library.
//!
//! Every fallible call returns an `int32_t` status: `LQ_OK` (0) on success,
//! the library's own error code (1 to 14, the same values the command-line
//! tool exits with) for numerical failures, or one of the negative codes
//! below for misuse of the interface. The message of the most recent failure
//! on the calling thread is available from [`lq_last_error`].
//!
//! Contexts and solutions are opaque handles owned by the caller and released
//! with their matching `_free` function. Strings returned by the library must
//! be released with [`lq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use liouville_q::elliptic::{ell_gamma, theta1};
use liouville_q::perturbative::{solve_excited, solve_ground, PerturbativeSolution, SolverOptions};
use liouville_q::tropical::enumerate_states;
use liouville_q::{Context, Error};
use num_complex::Complex64;

pub const LQ_OK: i32 = 0;
/// A required pointer argument was null.
pub const LQ_ERR_NULL: i32 = -1;
/// An argument was out of range for the interface (not a numerical failure).
pub const LQ_ERR_ARGUMENT: i32 = -2;
/// The library panicked; this is a bug and the message says where.
pub const LQ_ERR_PANIC: i32 = -3;

/// A complex number laid out as two consecutive doubles, matching C99
/// `double _Complex`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqComplex {
    pub re: f64,
    pub im: f64,
}

impl From<LqComplex> for Complex64 {
    fn from(z: LqComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for LqComplex {
    fn from(z: Complex64) -> Self {
        LqComplex { re: z.re, im: z.im }
    }
}

/// Precision and truncation settings shared by all evaluations.
pub struct LqContext(Context);

/// A perturbative solution of the Liouville equation for one state.
pub struct LqSolution(PerturbativeSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LQ_OK,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            LQ_ERR_PANIC
        }
    }
}

fn lib(e: Error) -> (i32, String) {
    (e.code(), e.to_string())
}

fn null(what: &str) -> (i32, String) {
    (LQ_ERR_NULL, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to a live value of type `T`.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (i32, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null if none failed yet.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Double-precision context with the default truncation policy. Never null.
#[no_mangle]
pub extern "C" fn lq_context_new() -> *mut LqContext {
    Box::into_raw(Box::new(LqContext(Context::double())))
}

/// Context working with `bits` bits of mantissa (53 selects plain doubles).
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn lq_context_with_bits(bits: u32, out: *mut *mut LqContext) -> i32 {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let ctx = if bits == 53 { Context::double() } else { Context::with_bits(bits).map_err(lib)? };
        *out = Box::into_raw(Box::new(LqContext(ctx)));
        Ok(())
    })
}

/// # Safety
/// `ctx` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lq_context_free(ctx: *mut LqContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Jacobi θ₁(x | τ).
///
/// # Safety
/// `ctx` must be a live context and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn lq_theta1(ctx: *const LqContext, x: LqComplex, tau: LqComplex, out: *mut LqComplex) -> i32 {
    guard(|| {
        let ctx = borrow(ctx, "ctx")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = theta1(x.into(), tau.into(), &ctx.0).map_err(lib)?.into();
        Ok(())
    })
}

/// Elliptic gamma function Γ(u; p, q).
///
/// # Safety
/// `ctx` must be a live context and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn lq_ell_gamma(
    ctx: *const LqContext,
    u: LqComplex,
    p: LqComplex,
    q: LqComplex,
    out: *mut LqComplex,
) -> i32 {
    guard(|| {
        let ctx = borrow(ctx, "ctx")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ell_gamma(u.into(), p.into(), q.into(), &ctx.0).map_err(lib)?.into();
        Ok(())
    })
}

fn options(degree: i32) -> Result<SolverOptions, (i32, String)> {
    if degree < 0 {
        return Err((LQ_ERR_ARGUMENT, format!("degree {degree} must be non-negative")));
    }
    Ok(SolverOptions { degree, ..SolverOptions::default() })
}

/// Ground state of the N-site chain through total degree `degree`.
///
/// # Safety
/// `ctx` must be a live context and `out` valid for a pointer write. On
/// failure `*out` is left untouched.
#[no_mangle]
pub unsafe extern "C" fn lq_solve_ground(
    ctx: *const LqContext,
    n_sites: usize,
    v: LqComplex,
    degree: i32,
    out: *mut *mut LqSolution,
) -> i32 {
    guard(|| {
        let ctx = borrow(ctx, "ctx")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let sol = solve_ground(n_sites, v.into(), &options(degree)?, &ctx.0).map_err(lib)?;
        *out = Box::into_raw(Box::new(LqSolution(sol)));
        Ok(())
    })
}

/// State `index` of the catalogue with `m` excitations.
///
/// # Safety
/// As for [`lq_solve_ground`].
#[no_mangle]
pub unsafe extern "C" fn lq_solve_excited(
    ctx: *const LqContext,
    n_sites: usize,
    m: usize,
    v: LqComplex,
    index: usize,
    degree: i32,
    out: *mut *mut LqSolution,
) -> i32 {
    guard(|| {
        let ctx = borrow(ctx, "ctx")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let states = enumerate_states(n_sites, m, v.into()).map_err(lib)?;
        let state = states
            .get(index)
            .ok_or_else(|| (LQ_ERR_ARGUMENT, format!("state {index} out of range ({} states)", states.len())))?;
        let sol = solve_excited(state, &options(degree)?, &ctx.0).map_err(lib)?;
        *out = Box::into_raw(Box::new(LqSolution(sol)));
        Ok(())
    })
}

/// Coefficient of p^a q^b in R₀.
///
/// # Safety
/// `sol` must be a live solution and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn lq_solution_r0_coefficient(sol: *const LqSolution, a: i32, b: i32, out: *mut LqComplex) -> i32 {
    guard(|| {
        let sol = borrow(sol, "sol")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sol.0.r0.get(&(a, b, 0)).into();
        Ok(())
    })
}

/// Largest relative Liouville residual over all solved degrees.
///
/// # Safety
/// `sol` must be a live solution and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn lq_solution_certificate(sol: *const LqSolution, out: *mut f64) -> i32 {
    guard(|| {
        let sol = borrow(sol, "sol")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sol.0.liouville_certificate().iter().map(|&(_, r)| r).fold(0.0, f64::max);
        Ok(())
    })
}

/// Serialises the solution to a freshly allocated JSON string.
///
/// # Safety
/// `sol` must be a live solution and `out` valid for a pointer write. Release
/// the string with [`lq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn lq_solution_to_json(sol: *const LqSolution, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let sol = borrow(sol, "sol")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let text = serde_json::to_string(&sol.0).map_err(|e| (LQ_ERR_ARGUMENT, e.to_string()))?;
        *out = CString::new(text).map_err(|e| (LQ_ERR_ARGUMENT, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lq_solution_free(sol: *mut LqSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
