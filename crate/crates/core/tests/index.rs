//! Sturm index counts: two negative directions for L₁, one for L₂, stable
//! under exponentially localized perturbations, with certified tail signs.

use std::sync::Arc;

use vortexspec::bvp::BvpSolution;
use vortexspec::index::{
    asymptotic_constants, compute_index_function, count_zeros, index, index_at, OperatorKind,
    OperatorSpec,
};
use vortexspec::vortex::{solve_vortex, SpinIndex, VortexProfile};

fn profile(m: u32) -> Arc<VortexProfile> {
    Arc::new(solve_vortex(SpinIndex(m), 50.0, 1e-10).unwrap())
}

/// A "profile" that is identically zero, turning the operator into the free
/// radial Laplacian piece.
fn zero_profile(m: u32, r_max: f64) -> Arc<VortexProfile> {
    let mesh: Vec<f64> = (0..=100).map(|k| r_max * k as f64 / 100.0).collect();
    let n = mesh.len();
    let sol = BvpSolution::new(mesh, 2, vec![0.0; 2 * n], vec![0.0; 2 * n], 0.0).unwrap();
    Arc::new(VortexProfile::from_solution(SpinIndex(m), sol).unwrap())
}

#[test]
fn free_equation_stays_positive() {
    let op = OperatorSpec::new(OperatorKind::L1, zero_profile(1, 50.0), 0.0).unwrap();
    let f = compute_index_function(&op, 50.0, 1e-10).unwrap();
    let zeros = count_zeros(&f).unwrap();
    assert!(zeros.is_empty(), "free equation has zeros at {zeros:?}");
    let c = asymptotic_constants(&f).unwrap();
    assert!((c.c0 - 1.0).abs() < 1e-9, "c0 = {}", c.c0);
    assert!(c.c1.abs() < 1e-6, "c1 = {}", c.c1);
}

#[test]
fn zero_counts_and_tail_signs_m_1_2_3() {
    for m in 1..=3u32 {
        let p = profile(m);
        for (kind, expect) in [(OperatorKind::L1, 2usize), (OperatorKind::L2, 1usize)] {
            let op = OperatorSpec::new(kind, p.clone(), 0.0).unwrap();
            let f = compute_index_function(&op, 50.0, 1e-10).unwrap();
            let zeros = count_zeros(&f).unwrap();
            assert_eq!(
                zeros.len(),
                expect,
                "m={m} {kind}: zeros at {zeros:?}"
            );
            let c = asymptotic_constants(&f).unwrap();
            match kind {
                OperatorKind::L1 => assert!(c.c0 > 0.0, "m={m} L1: c0 = {}", c.c0),
                OperatorKind::L2 => assert!(c.c0 < 0.0, "m={m} L2: c0 = {}", c.c0),
            }
            // certified count through the composed entry point
            assert_eq!(index(&op).unwrap(), expect);
            // tail sign matches the constant
            let u_end = f.solution.component(50.0, 0).unwrap();
            assert_eq!(u_end.signum(), c.c0.signum(), "m={m} {kind}");
        }
    }
}

#[test]
fn roots_are_simple() {
    for m in 1..=2u32 {
        let p = profile(m);
        for kind in [OperatorKind::L1, OperatorKind::L2] {
            let op = OperatorSpec::new(kind, p.clone(), 0.0).unwrap();
            let f = compute_index_function(&op, 50.0, 1e-10).unwrap();
            let sup = f
                .solution
                .mesh()
                .iter()
                .enumerate()
                .map(|(k, _)| f.solution.value_at_node(k, 0).abs())
                .fold(0.0f64, f64::max);
            for z in count_zeros(&f).unwrap() {
                let slope = f.solution.component(z, 1).unwrap().abs();
                assert!(
                    slope > 1e-4 * sup,
                    "m={m} {kind}: near-tangential zero at {z} (|Ũ'| = {slope:.3e})"
                );
            }
        }
    }
}

#[test]
fn index_is_stable_under_perturbation() {
    for m in 1..=3u32 {
        let p = profile(m);
        for kind in [OperatorKind::L1, OperatorKind::L2] {
            let base = index(&OperatorSpec::new(kind, p.clone(), 0.0).unwrap()).unwrap();
            for delta in [1e-4, 1e-3, 1e-2] {
                let op = OperatorSpec::new(kind, p.clone(), delta).unwrap();
                assert_eq!(
                    index(&op).unwrap(),
                    base,
                    "m={m} {kind} delta={delta}"
                );
            }
        }
    }
}

#[test]
fn zero_locations_are_domain_robust() {
    let p = Arc::new(solve_vortex(SpinIndex(1), 80.0, 1e-10).unwrap());
    let op = OperatorSpec::new(OperatorKind::L1, p, 0.0).unwrap();
    let z50 = count_zeros(&compute_index_function(&op, 50.0, 1e-10).unwrap()).unwrap();
    let z80 = count_zeros(&compute_index_function(&op, 80.0, 1e-10).unwrap()).unwrap();
    assert_eq!(z50.len(), z80.len());
    for (a, b) in z50.iter().zip(&z80) {
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
}

#[test]
fn domain_too_small_is_reported() {
    let op = OperatorSpec::new(OperatorKind::L1, profile(1), 0.0).unwrap();
    assert!(compute_index_function(&op, 60.0, 1e-10).is_err());
    // and index_at at a smaller domain works
    assert_eq!(index_at(&op, 40.0, 1e-10).unwrap(), 2);
}

#[test]
fn m_zero_is_rejected() {
    let p = Arc::new(solve_vortex(SpinIndex(0), 50.0, 1e-10).unwrap());
    assert!(OperatorSpec::new(OperatorKind::L1, p, 0.0).is_err());
}
