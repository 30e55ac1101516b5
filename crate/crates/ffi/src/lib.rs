//! C ABI for the vortex-soliton solvers: opaque handles, integer status
//! codes, and no panics across the boundary. See `include/vortexspec.h`
//! for the generated header.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use vortexspec::index::{index as sturm_index, OperatorKind, OperatorSpec};
use vortexspec::innerprod::{compute_j_table, compute_k_table};
use vortexspec::vortex::{solve_vortex, SpinIndex, VortexProfile};
use vortexspec::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VsStatus {
    VsOk = 0,
    VsNullPointer = 1,
    VsInvalidInput = 2,
    VsOutOfDomain = 3,
    VsSolverFailure = 4,
    VsUncertified = 5,
    VsInternalPanic = 6,
}

/// Opaque handle to a solved vortex profile.
pub struct VsProfile {
    inner: Arc<VortexProfile>,
}

/// Inner-product table entries for one operator family.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct VsTable {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub det: f64,
    pub trace: f64,
}

fn status_of(e: &Error) -> VsStatus {
    match e {
        Error::InvalidInput(_) => VsStatus::VsInvalidInput,
        Error::OutOfDomain { .. } | Error::ProfileDomainTooSmall { .. } => VsStatus::VsOutOfDomain,
        Error::NoPlateau { .. } | Error::UncertifiedTail { .. } => VsStatus::VsUncertified,
        _ => VsStatus::VsSolverFailure,
    }
}

fn guarded(f: impl FnOnce() -> VsStatus) -> VsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(VsStatus::VsInternalPanic)
}

/// Solve the vortex profile with winding number `m` on [0, r_max] and store
/// an owned handle in `*out`. The handle must be released with
/// `vs_profile_free`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_profile_solve(
    m: u32,
    r_max: f64,
    tol: f64,
    out: *mut *mut VsProfile,
) -> VsStatus {
    if out.is_null() {
        return VsStatus::VsNullPointer;
    }
    guarded(|| match solve_vortex(SpinIndex(m), r_max, tol) {
        Ok(profile) => {
            let handle = Box::new(VsProfile {
                inner: Arc::new(profile),
            });
            unsafe { *out = Box::into_raw(handle) };
            VsStatus::VsOk
        }
        Err(e) => status_of(&e),
    })
}

/// Release a profile handle. A null pointer is a no-op.
///
/// # Safety
/// `profile` must have been returned by `vs_profile_solve` and not freed.
#[no_mangle]
pub unsafe extern "C" fn vs_profile_free(profile: *mut VsProfile) {
    if !profile.is_null() {
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Mass 2π∫|Q|² r dr of the solved profile; NaN on a null handle.
///
/// # Safety
/// `profile` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn vs_profile_mass(profile: *const VsProfile) -> f64 {
    match unsafe { profile.as_ref() } {
        Some(p) => vortexspec::vortex::mass(&p.inner),
        None => f64::NAN,
    }
}

/// Energy ∫|∇Q|² − ½∫|Q|⁴ of the solved profile; NaN on a null handle.
///
/// # Safety
/// `profile` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn vs_profile_energy(profile: *const VsProfile) -> f64 {
    match unsafe { profile.as_ref() } {
        Some(p) => vortexspec::vortex::energy(&p.inner),
        None => f64::NAN,
    }
}

/// Evaluate the physical profile R(r) and its transformed derivative R̃'(r).
///
/// # Safety
/// All pointers must be valid; `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vs_profile_eval(
    profile: *const VsProfile,
    r: f64,
    value: *mut f64,
    derivative: *mut f64,
) -> VsStatus {
    let Some(p) = (unsafe { profile.as_ref() }) else {
        return VsStatus::VsNullPointer;
    };
    if value.is_null() || derivative.is_null() {
        return VsStatus::VsNullPointer;
    }
    guarded(|| {
        match (p.inner.physical(r), p.inner.r_tilde_prime(r)) {
            (Ok(v), Ok(d)) => {
                unsafe {
                    *value = v;
                    *derivative = d;
                }
                VsStatus::VsOk
            }
            (Err(e), _) | (_, Err(e)) => status_of(&e),
        }
    })
}

/// Certified Sturm index of the linearized operator (`operator` = 1 or 2)
/// with perturbation strength `delta`; written to `*count`.
///
/// # Safety
/// `profile` must be a live handle and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_index_count(
    profile: *const VsProfile,
    operator: u32,
    delta: f64,
    count: *mut usize,
) -> VsStatus {
    let Some(p) = (unsafe { profile.as_ref() }) else {
        return VsStatus::VsNullPointer;
    };
    if count.is_null() {
        return VsStatus::VsNullPointer;
    }
    let kind = match operator {
        1 => OperatorKind::L1,
        2 => OperatorKind::L2,
        _ => return VsStatus::VsInvalidInput,
    };
    guarded(|| {
        let result = OperatorSpec::new(kind, p.inner.clone(), delta).and_then(|op| sturm_index(&op));
        match result {
            Ok(n) => {
                unsafe { *count = n };
                VsStatus::VsOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Inner-product table (`family` = 0 for K, 1 for J) at perturbation
/// strength `delta`, solved to tolerance `tol`; written to `*table`.
///
/// # Safety
/// `profile` must be a live handle and `table` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_inner_products(
    profile: *const VsProfile,
    family: u32,
    delta: f64,
    tol: f64,
    table: *mut VsTable,
) -> VsStatus {
    let Some(p) = (unsafe { profile.as_ref() }) else {
        return VsStatus::VsNullPointer;
    };
    if table.is_null() {
        return VsStatus::VsNullPointer;
    }
    guarded(|| {
        let computed = match family {
            0 => compute_k_table(&p.inner, delta, tol),
            1 => compute_j_table(&p.inner, delta, tol),
            _ => return VsStatus::VsInvalidInput,
        };
        match computed {
            Ok(t) => {
                unsafe {
                    *table = VsTable {
                        v1: t.v1,
                        v2: t.v2,
                        v3: t.v3,
                        det: t.det,
                        trace: t.trace,
                    };
                }
                VsStatus::VsOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn vs_status_message(status: VsStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        VsStatus::VsOk => b"ok\0",
        VsStatus::VsNullPointer => b"null pointer argument\0",
        VsStatus::VsInvalidInput => b"invalid input\0",
        VsStatus::VsOutOfDomain => b"evaluation point outside the solved domain\0",
        VsStatus::VsSolverFailure => b"solver failed to converge\0",
        VsStatus::VsUncertified => b"result could not be certified\0",
        VsStatus::VsInternalPanic => b"internal error\0",
    };
    msg.as_ptr().cast()
}
