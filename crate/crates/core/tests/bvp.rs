//! Solver checks against problems with known solutions.

use std::sync::Arc;

use vortexspec::bvp::{
    augment_with_integrals, solve_bvp, solve_bvp_with, BcFn, InitialGuess, IntegrandFn, OdeSystem,
    RadialMesh, RhsFn, SolveOptions,
};

/// u'' + u'/r - u = (4r^2 - 5) e^{-r^2}, exact solution u = e^{-r^2}
/// (the decaying one; Dirichlet data at r_max pins it).
fn manufactured_system(r_max: f64) -> OdeSystem {
    let rhs: RhsFn = Arc::new(move |r, y, out| {
        out[0] = y[1];
        out[1] = y[0] + (4.0 * r * r - 5.0) * (-r * r).exp();
    });
    let left: BcFn = Arc::new(|y0, out| out[0] = y0[1]);
    let right: BcFn = Arc::new(move |yn, out| out[0] = yn[0] - (-r_max * r_max).exp());
    OdeSystem::new(
        2,
        Some(vec![0.0, 0.0, 0.0, -1.0]),
        rhs,
        left,
        1,
        right,
        1,
        r_max,
    )
    .unwrap()
}

#[test]
fn manufactured_gaussian() {
    let r_max = 10.0;
    let system = manufactured_system(r_max);
    let mesh = RadialMesh::uniform(r_max, 40).unwrap();
    let guess = InitialGuess::Constant(vec![0.0, 0.0]);
    let sol = solve_bvp(&system, &mesh, &guess, 1e-10).unwrap();
    assert!(sol.residual_norm() <= 1e-10);
    for &r in &[0.0, 0.3, 1.0, 2.5, 4.0, 7.7] {
        let u = sol.component(r, 0).unwrap();
        let du = sol.component_derivative(r, 0).unwrap();
        let exact = (-r * r).exp();
        assert!((u - exact).abs() < 1e-9, "u({r}) = {u}, want {exact}");
        assert!((du + 2.0 * r * exact).abs() < 1e-7, "u'({r}) = {du}");
    }
}

#[test]
fn fourth_order_convergence_on_fixed_meshes() {
    let r_max = 5.0;
    let system = manufactured_system(r_max);
    let guess = InitialGuess::Constant(vec![0.0, 0.0]);
    let opts = SolveOptions {
        adaptive: false,
        tol: 1e-10,
        ..SolveOptions::default()
    };
    let mut errs = Vec::new();
    for intervals in [20usize, 40, 80] {
        let mesh = RadialMesh::uniform(r_max, intervals).unwrap();
        let sol = solve_bvp_with(&system, &mesh, &guess, &opts).unwrap();
        let mut e = 0.0f64;
        for k in 0..=200 {
            let r = r_max * k as f64 / 200.0;
            let u = sol.component(r, 0).unwrap();
            e = e.max((u - (-r * r).exp()).abs());
        }
        errs.push(e);
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(ratio > 12.0, "halving h gained only {ratio:.2}x (errors {errs:?})");
    }
    assert!(errs[2] < 1e-6, "errors {errs:?}");
}

#[test]
fn zero_data_gives_zero_solution() {
    let r_max = 8.0;
    let rhs: RhsFn = Arc::new(|_r, y, out| {
        out[0] = y[1];
        out[1] = y[0] + y[0] * y[0] * y[0];
    });
    let left: BcFn = Arc::new(|y0, out| out[0] = y0[1]);
    let right: BcFn = Arc::new(|yn, out| out[0] = yn[0]);
    let system = OdeSystem::new(
        2,
        Some(vec![0.0, 0.0, 0.0, -1.0]),
        rhs,
        left,
        1,
        right,
        1,
        r_max,
    )
    .unwrap();
    let mesh = RadialMesh::uniform(r_max, 16).unwrap();
    let sol = solve_bvp(
        &system,
        &mesh,
        &InitialGuess::Constant(vec![0.0, 0.0]),
        1e-12,
    )
    .unwrap();
    for k in 0..sol.mesh().len() {
        assert_eq!(sol.value_at_node(k, 0), 0.0);
        assert_eq!(sol.value_at_node(k, 1), 0.0);
    }
}

fn bessel_i0(r: f64) -> f64 {
    // power series, converges fast for r <= 4
    let q = 0.25 * r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// All-left boundary conditions (an initial value problem in disguise) solve
/// the modified Bessel equation u'' + u'/r - u = 0, u(0) = 1.
#[test]
fn bessel_from_left_conditions_only() {
    let r_max = 4.0;
    let rhs: RhsFn = Arc::new(|_r, y, out| {
        out[0] = y[1];
        out[1] = y[0];
    });
    let left: BcFn = Arc::new(|y0, out| {
        out[0] = y0[0] - 1.0;
        out[1] = y0[1];
    });
    let right: BcFn = Arc::new(|_yn, _out| {});
    let system = OdeSystem::new(
        2,
        Some(vec![0.0, 0.0, 0.0, -1.0]),
        rhs,
        left,
        2,
        right,
        0,
        r_max,
    )
    .unwrap();
    let mesh = RadialMesh::uniform(r_max, 32).unwrap();
    let sol = solve_bvp(
        &system,
        &mesh,
        &InitialGuess::Constant(vec![1.0, 0.0]),
        1e-10,
    )
    .unwrap();
    for &r in &[0.5, 1.0, 2.0, 3.0, 4.0] {
        let u = sol.component(r, 0).unwrap();
        let exact = bessel_i0(r);
        assert!(
            (u - exact).abs() < 1e-9 * exact,
            "I0({r}): {u} vs {exact}"
        );
    }
}

#[test]
fn running_integral_matches_quadrature_of_solution() {
    let r_max = 10.0;
    let system = manufactured_system(r_max);
    let g: IntegrandFn = Arc::new(|r, y| y[0] * y[0] * r);
    let aug = augment_with_integrals(&system, vec![g]);
    assert_eq!(aug.dim(), 3);
    let mesh = RadialMesh::uniform(r_max, 40).unwrap();
    let tol = 1e-10;
    let sol = solve_bvp(&aug, &mesh, &InitialGuess::Constant(vec![0.0; 3]), tol).unwrap();

    let running = sol.value_at_node(sol.mesh().len() - 1, 2);
    // exact: integral of e^{-2r^2} r dr = (1 - e^{-2 r_max^2}) / 4
    let exact = 0.25 * (1.0 - (-2.0 * r_max * r_max).exp());
    assert!((running - exact).abs() < 10.0 * tol, "{running} vs {exact}");

    let quad = sol.integrate(|r, y| y[0] * y[0] * r);
    assert!((running - quad).abs() < 10.0 * tol, "{running} vs {quad}");
}

#[test]
fn solves_are_deterministic() {
    let r_max = 10.0;
    let system = manufactured_system(r_max);
    let mesh = RadialMesh::uniform(r_max, 25).unwrap();
    let guess = InitialGuess::Constant(vec![0.0, 0.0]);
    let a = solve_bvp(&system, &mesh, &guess, 1e-10).unwrap();
    let b = solve_bvp(&system, &mesh, &guess, 1e-10).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mesh_validation() {
    assert!(RadialMesh::new(vec![0.0]).is_err());
    assert!(RadialMesh::new(vec![0.5, 1.0]).is_err());
    assert!(RadialMesh::new(vec![0.0, 1.0, 1.0]).is_err());
    assert!(RadialMesh::new(vec![0.0, 1.0, 2.0]).is_ok());
}

#[test]
fn out_of_domain_evaluation_is_rejected() {
    let r_max = 5.0;
    let system = manufactured_system(r_max);
    let mesh = RadialMesh::uniform(r_max, 20).unwrap();
    let sol = solve_bvp(
        &system,
        &mesh,
        &InitialGuess::Constant(vec![0.0, 0.0]),
        1e-8,
    )
    .unwrap();
    assert!(sol.component(5.0001, 0).is_err());
    assert!(sol.component(-0.1, 0).is_err());
}
