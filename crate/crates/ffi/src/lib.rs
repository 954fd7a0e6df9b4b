//! C ABI for `ccdist`.
//!
//! Every entry point returns a [`CcdStatus`]. On failure the message is kept in
//! a thread-local slot readable with [`ccd_last_error_message`]. Objects are
//! opaque handles released with their `_free` function; strings returned by the
//! library are released with [`ccd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ccdist::collinear::{moulton_enumerate, solve_ordering, CollinearOptions, CollinearSolution, Ordering};
use ccdist::oracle::cross_validate;
use ccdist::report::{CollinearSolutionJson, Provenance, Status, Tolerances, TrapezoidReport};
use ccdist::trapezoid5::{solve_default, SolveOptions, TrapezoidSolution, CLASSIFY_TOL, CLUSTER_TOL};
use ccdist::{DistanceVector, Error, MassVector};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcdStatus {
    Ok = 0,
    /// Newton iteration failed or the linear system was singular.
    NonConvergence = 1,
    /// Converged point outside the admissible region or a failed check.
    InvalidRegion = 2,
    /// Bad masses, ordering or distances.
    InvalidInput = 3,
    NullPointer = 4,
    /// Output buffer shorter than required; the required length is still written.
    BufferTooSmall = 5,
    Internal = 6,
}

/// Positive body masses.
pub struct CcdMasses(MassVector);

/// Five-body trapezoid critical point with its multipliers and checks.
pub struct CcdTrapezoid {
    masses: MassVector,
    solution: TrapezoidSolution,
}

/// Collinear central configuration for one ordering.
pub struct CcdCollinear(CollinearSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(err: &Error) -> CcdStatus {
    match err.exit_code() {
        1 => CcdStatus::NonConvergence,
        2 => CcdStatus::InvalidRegion,
        _ => match err {
            Error::Io(_) | Error::Json(_) => CcdStatus::Internal,
            _ => CcdStatus::InvalidInput,
        },
    }
}

fn fail(status: CcdStatus, msg: impl Into<String>) -> CcdStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CcdStatus) -> CcdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CcdStatus::Internal, "panic inside ccdist"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(CcdStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

macro_rules! try_ccd {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail(status_of(&err), err.to_string()),
        }
    };
}

/// # Safety
/// `data` must point to `len` readable doubles.
unsafe fn slice<'a, T>(data: *const T, len: usize) -> &'a [T] {
    if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(data, len)
    }
}

/// Copies `src` into `(out, cap)` and stores the length in `len_out`.
///
/// # Safety
/// `out` must be writable for `cap` elements and `len_out` valid when non-null.
unsafe fn copy_out(src: &[f64], out: *mut f64, cap: usize, len_out: *mut usize) -> CcdStatus {
    if !len_out.is_null() {
        *len_out = src.len();
    }
    if cap < src.len() {
        return fail(CcdStatus::BufferTooSmall, format!("buffer holds {cap} values, {} needed", src.len()));
    }
    if out.is_null() {
        return fail(CcdStatus::NullPointer, "null pointer: out");
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    CcdStatus::Ok
}

fn into_c_string(s: String, out: *mut *mut c_char) -> CcdStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: caller checked `out` is non-null.
            unsafe { *out = c.into_raw() };
            CcdStatus::Ok
        }
        Err(_) => fail(CcdStatus::Internal, "report contains a NUL byte"),
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn ccd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ccd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ccd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a mass vector from `n` positive values.
///
/// # Safety
/// `data` must point to `n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_masses_new(data: *const f64, n: usize, out: *mut *mut CcdMasses) -> CcdStatus {
    guard(|| {
        non_null!(data, out);
        let m = try_ccd!(MassVector::new(slice(data, n).to_vec()));
        *out = Box::into_raw(Box::new(CcdMasses(m)));
        CcdStatus::Ok
    })
}

/// # Safety
/// `m` must come from [`ccd_masses_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ccd_masses_free(m: *mut CcdMasses) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Solves the five-body trapezoid system from the built-in starting guesses.
///
/// A converged critical point is returned in `out` even when it is not a
/// realizable configuration; the status is then `InvalidRegion`.
///
/// # Safety
/// `masses` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_trapezoid_solve(
    masses: *const CcdMasses,
    tol: f64,
    max_iter: usize,
    out: *mut *mut CcdTrapezoid,
) -> CcdStatus {
    guard(|| {
        non_null!(masses, out);
        let m = &(*masses).0;
        let opts = SolveOptions { tol, max_iter, inertia_target: None };
        let solution = try_ccd!(solve_default(m, &opts));
        let status = if solution.membership.in_t {
            CcdStatus::Ok
        } else {
            fail(
                CcdStatus::InvalidRegion,
                format!("not geometrically realizable: {}", solution.membership.violated.join("; ")),
            )
        };
        *out = Box::into_raw(Box::new(CcdTrapezoid { masses: m.clone(), solution }));
        status
    })
}

/// # Safety
/// `t` must come from [`ccd_trapezoid_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ccd_trapezoid_free(t: *mut CcdTrapezoid) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Ten mutual distances in the order r12, r13, r14, r15, r23, ..., r45.
///
/// # Safety
/// `t` must be live, `out` writable for `cap` doubles, `len_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_trapezoid_distances(
    t: *const CcdTrapezoid,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> CcdStatus {
    guard(|| {
        non_null!(t);
        copy_out((*t).solution.r.entries(), out, cap, len_out)
    })
}

/// Multipliers δ, ω, θ.
///
/// # Safety
/// `t` must be live and the three outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_trapezoid_multipliers(
    t: *const CcdTrapezoid,
    delta: *mut f64,
    omega: *mut f64,
    theta: *mut f64,
) -> CcdStatus {
    guard(|| {
        non_null!(t, delta, omega, theta);
        let mult = &(*t).solution.multipliers;
        *delta = mult.delta;
        *omega = mult.omega;
        *theta = mult.theta;
        CcdStatus::Ok
    })
}

/// Whether the point is realizable and all classification checks pass.
///
/// # Safety
/// `t` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_trapezoid_is_valid(t: *const CcdTrapezoid, out: *mut bool) -> CcdStatus {
    guard(|| {
        non_null!(t, out);
        let s = &(*t).solution;
        *out = s.membership.in_t && s.flags.all_pass() && s.symmetry.violated.is_empty();
        CcdStatus::Ok
    })
}

/// JSON report of the solution, same schema as `ccdist solve-trapezoid`.
///
/// # Safety
/// `t` must be live and `out` writable; free the string with [`ccd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ccd_trapezoid_report_json(t: *const CcdTrapezoid, out: *mut *mut c_char) -> CcdStatus {
    guard(|| {
        non_null!(t, out);
        let CcdTrapezoid { masses, solution } = &*t;
        let status = if !solution.membership.in_t {
            Status::InvalidRegion
        } else if !solution.flags.all_pass() || !solution.symmetry.violated.is_empty() {
            Status::ClassificationFailed
        } else {
            Status::Ok
        };
        let tol =
            Tolerances { solver: ccdist::trapezoid5::SOLVER_TOL, classification: CLASSIFY_TOL, cluster: CLUSTER_TOL };
        let mut rep =
            TrapezoidReport::new(solution, masses, status, Provenance::new(0, tol, vec![solution.iterations]));
        if solution.membership.in_t {
            rep.cross_validation = Some(try_ccd!(cross_validate(&solution.r, masses)).max_relative_error);
        }
        into_c_string(try_ccd!(serde_json::to_string_pretty(&rep).map_err(Error::from)), out)
    })
}

/// Solves the collinear configuration for a body ordering given as 1-based
/// labels, left to right. A NULL `ordering` means 1, 2, ..., n.
///
/// # Safety
/// `masses` must be live, `ordering` NULL or `n` readable values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_collinear_solve(
    masses: *const CcdMasses,
    ordering: *const usize,
    tol: f64,
    max_iter: usize,
    out: *mut *mut CcdCollinear,
) -> CcdStatus {
    guard(|| {
        non_null!(masses, out);
        let m = &(*masses).0;
        let ord = if ordering.is_null() {
            Ordering::identity(m.n())
        } else {
            try_ccd!(Ordering::new(slice(ordering, m.n()).to_vec()))
        };
        let sol = try_ccd!(solve_ordering(m, &ord, &CollinearOptions { tol, max_iter }));
        *out = Box::into_raw(Box::new(CcdCollinear(sol)));
        CcdStatus::Ok
    })
}

/// # Safety
/// `c` must come from [`ccd_collinear_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ccd_collinear_free(c: *mut CcdCollinear) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Consecutive gaps along the line, n - 1 values.
///
/// # Safety
/// `c` must be live, `out` writable for `cap` doubles, `len_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_collinear_gaps(
    c: *const CcdCollinear,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> CcdStatus {
    guard(|| {
        non_null!(c);
        copy_out(&(*c).0.gaps, out, cap, len_out)
    })
}

/// Positions along the line with the centre of mass at the origin.
///
/// # Safety
/// `c` must be live, `out` writable for `cap` doubles, `len_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_collinear_positions(
    c: *const CcdCollinear,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> CcdStatus {
    guard(|| {
        non_null!(c);
        copy_out(&(*c).0.positions, out, cap, len_out)
    })
}

/// Multiplier δ of the collinear solution.
///
/// # Safety
/// `c` must be live and `delta` writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_collinear_delta(c: *const CcdCollinear, delta: *mut f64) -> CcdStatus {
    guard(|| {
        non_null!(c, delta);
        *delta = (*c).0.delta;
        CcdStatus::Ok
    })
}

/// JSON form of the collinear solution.
///
/// # Safety
/// `c` must be live and `out` writable; free the string with [`ccd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ccd_collinear_solution_json(c: *const CcdCollinear, out: *mut *mut c_char) -> CcdStatus {
    guard(|| {
        non_null!(c, out);
        let json = CollinearSolutionJson::from(&(*c).0);
        into_c_string(try_ccd!(serde_json::to_string_pretty(&json).map_err(Error::from)), out)
    })
}

/// Number of distinct collinear configurations found over all orderings.
///
/// # Safety
/// `masses` must be live and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_moulton_count(
    masses: *const CcdMasses,
    tol: f64,
    max_iter: usize,
    count: *mut usize,
) -> CcdStatus {
    guard(|| {
        non_null!(masses, count);
        let sols = try_ccd!(moulton_enumerate(&(*masses).0, &CollinearOptions { tol, max_iter }));
        *count = sols.len();
        CcdStatus::Ok
    })
}

/// Re-solves `r` (n(n-1)/2 packed distances) in position space and writes
/// the largest relative distance discrepancy. Returns `InvalidRegion` when it
/// exceeds the cross-validation tolerance.
///
/// # Safety
/// `masses` must be live, `r` readable for `len` doubles, `max_error` writable.
#[no_mangle]
pub unsafe extern "C" fn ccd_cross_validate(
    masses: *const CcdMasses,
    r: *const f64,
    len: usize,
    max_error: *mut f64,
) -> CcdStatus {
    guard(|| {
        non_null!(masses, r, max_error);
        let m = &(*masses).0;
        let dv = try_ccd!(DistanceVector::new(m.n(), slice(r, len).to_vec()));
        let cv = try_ccd!(cross_validate(&dv, m));
        *max_error = cv.max_relative_error;
        if cv.passed {
            CcdStatus::Ok
        } else {
            fail(CcdStatus::InvalidRegion, format!("relative discrepancy {:e}", cv.max_relative_error))
        }
    })
}

/// Reads the last error message into an owned Rust string; for tests and bindings.
pub fn last_error() -> Option<String> {
    let p = ccd_last_error_message();
    // SAFETY: a non-null pointer refers to the live thread-local CString.
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}
