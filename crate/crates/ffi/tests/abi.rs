//! Exercises the C entry points exactly as a foreign caller would: through
//! raw pointers and status codes.

use std::ffi::CStr;
use std::ptr;

use vortexspec_ffi::{
    vs_index_count, vs_inner_products, vs_profile_energy, vs_profile_eval, vs_profile_free,
    vs_profile_mass, vs_profile_solve, vs_status_message, VsProfile, VsStatus, VsTable,
};

fn solve(m: u32) -> *mut VsProfile {
    let mut handle: *mut VsProfile = ptr::null_mut();
    let status = unsafe { vs_profile_solve(m, 50.0, 1e-10, &mut handle) };
    assert_eq!(status, VsStatus::VsOk);
    assert!(!handle.is_null());
    handle
}

#[test]
fn profile_lifecycle_and_observables() {
    let handle = solve(1);
    unsafe {
        let mass = vs_profile_mass(handle);
        assert!((mass - 48.2983).abs() < 1e-3, "mass {mass}");
        let energy = vs_profile_energy(handle);
        assert!(energy.abs() < 1e-5 * mass, "energy {energy}");
        let (mut v, mut d) = (0.0, 0.0);
        assert_eq!(
            vs_profile_eval(handle, 1.5, &mut v, &mut d),
            VsStatus::VsOk
        );
        assert!(v > 1.0, "R(1.5) = {v}");
        assert_eq!(
            vs_profile_eval(handle, 60.0, &mut v, &mut d),
            VsStatus::VsOutOfDomain
        );
        vs_profile_free(handle);
    }
}

#[test]
fn index_counts_through_the_abi() {
    let handle = solve(1);
    unsafe {
        let mut count = 0usize;
        assert_eq!(
            vs_index_count(handle, 1, 0.0, &mut count),
            VsStatus::VsOk
        );
        assert_eq!(count, 2);
        assert_eq!(
            vs_index_count(handle, 2, 0.0, &mut count),
            VsStatus::VsOk
        );
        assert_eq!(count, 1);
        assert_eq!(
            vs_index_count(handle, 3, 0.0, &mut count),
            VsStatus::VsInvalidInput
        );
        vs_profile_free(handle);
    }
}

#[test]
fn inner_products_through_the_abi() {
    let handle = solve(1);
    let mut table = VsTable {
        v1: 0.0,
        v2: 0.0,
        v3: 0.0,
        det: 0.0,
        trace: 0.0,
    };
    unsafe {
        assert_eq!(
            vs_inner_products(handle, 0, 0.0, 1e-10, &mut table),
            VsStatus::VsOk
        );
        let tau = std::f64::consts::TAU;
        assert!((table.v1 / tau + 0.48237).abs() < 1e-3, "K1 {}", table.v1);
        assert!(table.det > 0.0 && table.trace < 0.0);
        assert_eq!(
            vs_inner_products(handle, 7, 0.0, 1e-10, &mut table),
            VsStatus::VsInvalidInput
        );
        vs_profile_free(handle);
    }
}

#[test]
fn null_and_error_handling() {
    unsafe {
        assert_eq!(
            vs_profile_solve(1, 50.0, 1e-10, ptr::null_mut()),
            VsStatus::VsNullPointer
        );
        let mut handle: *mut VsProfile = ptr::null_mut();
        // r_max below the solver's documented minimum
        assert_ne!(
            vs_profile_solve(1, 5.0, 1e-10, &mut handle),
            VsStatus::VsOk
        );
        assert!(vs_profile_mass(ptr::null()).is_nan());
        let msg = CStr::from_ptr(vs_status_message(VsStatus::VsNullPointer));
        assert_eq!(msg.to_str().unwrap(), "null pointer argument");
        vs_profile_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated_and_covers_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/vortexspec.h"
    ))
    .expect("header generated at build time");
    for symbol in [
        "vs_profile_solve",
        "vs_profile_free",
        "vs_profile_mass",
        "vs_profile_energy",
        "vs_profile_eval",
        "vs_index_count",
        "vs_inner_products",
        "vs_status_message",
        "VsStatus",
        "VsTable",
    ] {
        assert!(header.contains(symbol), "header missing {symbol}");
    }
}
