//! Nonlinear collocation on 3-point Lobatto points (order 4) with damped
//! Newton iteration and defect-driven mesh refinement.

use super::band::BandMatrix;
use super::solution::BvpSolution;
use super::{InitialGuess, OdeSystem, RadialMesh};
use crate::error::{Error, Result};

/// Defect sample points per interval. The three collocation points (both
/// endpoints and the midpoint) have zero defect by construction, so the
/// samples bracket them.
const DEFECT_SAMPLES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

const FD_EPS: f64 = 1.4901161193847656e-8; // sqrt(machine epsilon)
const FD_EPS_CBRT: f64 = 6.055454452393343e-6; // cbrt(machine epsilon)

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Bound on the maximal collocation defect sampled at 5 points per interval.
    pub tol: f64,
    pub max_nodes: usize,
    /// Disable to solve on the given mesh only (no refinement, no defect gate).
    pub adaptive: bool,
    pub max_outer_iterations: usize,
    pub max_backtracks: usize,
    pub max_refinement_passes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_nodes: 200_000,
            adaptive: true,
            max_outer_iterations: 50,
            max_backtracks: 30,
            max_refinement_passes: 40,
        }
    }
}

/// Solve with the default options at the given tolerance.
pub fn solve_bvp(
    system: &OdeSystem,
    initial_mesh: &RadialMesh,
    guess: &InitialGuess,
    tol: f64,
) -> Result<BvpSolution> {
    let opts = SolveOptions {
        tol,
        ..SolveOptions::default()
    };
    solve_bvp_with(system, initial_mesh, guess, &opts)
}

pub fn solve_bvp_with(
    system: &OdeSystem,
    initial_mesh: &RadialMesh,
    guess: &InitialGuess,
    opts: &SolveOptions,
) -> Result<BvpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {} must be positive", opts.tol)));
    }
    if (initial_mesh.r_max() - system.r_max()).abs() > 1e-12 * system.r_max() {
        return Err(Error::InvalidInput(format!(
            "mesh ends at {} but the system domain is [0, {}]",
            initial_mesh.r_max(),
            system.r_max()
        )));
    }
    let n = system.dim();
    let mut nodes = initial_mesh.nodes().to_vec();
    let mut y = vec![0.0; nodes.len() * n];
    for (k, &r) in nodes.iter().enumerate() {
        guess.sample(r, &mut y[k * n..(k + 1) * n]);
    }

    for _pass in 0..opts.max_refinement_passes {
        let rnorm = newton(system, &nodes, &mut y, opts)?;
        let mut f_nodes = vec![0.0; nodes.len() * n];
        node_derivatives(system, &nodes, &y, &mut f_nodes);
        let defects = interval_defects(system, &nodes, &y, &f_nodes);
        let max_defect = defects.iter().cloned().fold(0.0f64, f64::max);
        if !opts.adaptive {
            return Ok(BvpSolution::from_parts(nodes, n, y, f_nodes, max_defect));
        }

        // The sampled defect on an interval of width h carries a noise floor
        // of about (1.5·|collocation residual| + 6 eps ‖y‖) / h — splitting
        // below it can never succeed, so each interval is held to the larger
        // of tol and its own floor.
        let ynorm = inf_norm(&y);
        let floor = 2.0 * (1.5 * rnorm + 6.0e-16 * ynorm);
        let mut new_nodes = Vec::with_capacity(nodes.len() * 2);
        new_nodes.push(nodes[0]);
        let mut split_any = false;
        for i in 0..nodes.len() - 1 {
            let (a, b) = (nodes[i], nodes[i + 1]);
            let eff_tol = opts.tol.max(floor / (b - a));
            if defects[i] > eff_tol && b - a > 1e-10 {
                let k = ((defects[i] / (0.5 * eff_tol)).powf(1.0 / 3.0)).ceil() as usize;
                let k = k.clamp(2, 10);
                for j in 1..k {
                    new_nodes.push(a + (b - a) * j as f64 / k as f64);
                }
                split_any = true;
            }
            new_nodes.push(b);
        }
        if !split_any {
            return Ok(BvpSolution::from_parts(nodes, n, y, f_nodes, max_defect));
        }
        if new_nodes.len() > opts.max_nodes {
            return Err(Error::MeshLimitExceeded { limit: opts.max_nodes });
        }
        let old = BvpSolution::from_parts(nodes, n, y, f_nodes, max_defect);
        nodes = new_nodes;
        y = vec![0.0; nodes.len() * n];
        for (k, &r) in nodes.iter().enumerate() {
            old.evaluate_into(r, &mut y[k * n..(k + 1) * n]).unwrap();
        }
    }
    Err(Error::MeshLimitExceeded { limit: opts.max_nodes })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn node_derivatives(system: &OdeSystem, nodes: &[f64], y: &[f64], f_nodes: &mut [f64]) {
    let n = system.dim();
    for (k, &r) in nodes.iter().enumerate() {
        system.eval_rhs(r, &y[k * n..(k + 1) * n], &mut f_nodes[k * n..(k + 1) * n]);
    }
}

/// Collocation residual: left BC rows, one Lobatto/Simpson block per
/// interval, right BC rows.
fn compute_residual(system: &OdeSystem, nodes: &[f64], y: &[f64], res: &mut [f64]) {
    let n = system.dim();
    let nn = nodes.len();
    let kl = system.n_left();
    let mut f_nodes = vec![0.0; nn * n];
    node_derivatives(system, nodes, y, &mut f_nodes);

    system.eval_left_bc(&y[0..n], &mut res[0..kl]);
    let mut ym = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for i in 0..nn - 1 {
        let h = nodes[i + 1] - nodes[i];
        let mid = 0.5 * (nodes[i] + nodes[i + 1]);
        let ya = &y[i * n..(i + 1) * n];
        let yb = &y[(i + 1) * n..(i + 2) * n];
        let fa = &f_nodes[i * n..(i + 1) * n];
        let fb = &f_nodes[(i + 1) * n..(i + 2) * n];
        for c in 0..n {
            ym[c] = 0.5 * (ya[c] + yb[c]) - h / 8.0 * (fb[c] - fa[c]);
        }
        system.eval_rhs(mid, &ym, &mut fm);
        let row = kl + i * n;
        for c in 0..n {
            res[row + c] = yb[c] - ya[c] - h / 6.0 * (fa[c] + 4.0 * fm[c] + fb[c]);
        }
    }
    let last = &y[(nn - 1) * n..nn * n];
    system.eval_right_bc(last, &mut res[kl + (nn - 1) * n..]);
}

/// Central-difference Jacobian of the full right-hand side at fixed r. The
/// step scales with the component value (plus a small floor): polynomial
/// terms with huge coefficients like r^{2m} y³ acting on exponentially small
/// tail values would otherwise turn a fixed absolute step into garbage.
fn rhs_jacobian(system: &OdeSystem, r: f64, y: &[f64], jac: &mut [f64]) {
    let n = system.dim();
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut yp = y.to_vec();
    for j in 0..n {
        let h = FD_EPS_CBRT * y[j].abs() + 1e-14;
        yp[j] = y[j] + h;
        system.eval_rhs(r, &yp, &mut f1);
        yp[j] = y[j] - h;
        system.eval_rhs(r, &yp, &mut f0);
        yp[j] = y[j];
        for i in 0..n {
            jac[i * n + j] = (f1[i] - f0[i]) / (2.0 * h);
        }
    }
}

fn bc_jacobian(
    eval: impl Fn(&[f64], &mut [f64]),
    y: &[f64],
    n_res: usize,
    jac: &mut [f64],
) {
    let n = y.len();
    let mut g0 = vec![0.0; n_res];
    let mut g1 = vec![0.0; n_res];
    let mut yp = y.to_vec();
    eval(y, &mut g0);
    for j in 0..n {
        let h = FD_EPS * (1.0 + y[j].abs());
        yp[j] = y[j] + h;
        eval(&yp, &mut g1);
        yp[j] = y[j];
        for i in 0..n_res {
            jac[i * n + j] = (g1[i] - g0[i]) / h;
        }
    }
}

fn assemble_jacobian(system: &OdeSystem, nodes: &[f64], y: &[f64], band: &mut BandMatrix) {
    let n = system.dim();
    let nn = nodes.len();
    let kl_bc = system.n_left();
    band.reset();

    let mut jac = vec![0.0; kl_bc.max(system.n_right()) * n];
    bc_jacobian(
        |v, out| system.eval_left_bc(v, out),
        &y[0..n],
        kl_bc,
        &mut jac,
    );
    for i in 0..kl_bc {
        for j in 0..n {
            band.set(i, j, jac[i * n + j]);
        }
    }

    let mut f_nodes = vec![0.0; nn * n];
    node_derivatives(system, nodes, y, &mut f_nodes);

    let mut j_next = vec![0.0; n * n];
    let mut j_curr = vec![0.0; n * n];
    rhs_jacobian(system, nodes[0], &y[0..n], &mut j_curr);
    let mut jm = vec![0.0; n * n];
    let mut ym = vec![0.0; n];
    let mut ma = vec![0.0; n * n];
    let mut mb = vec![0.0; n * n];
    let mut blk_a = vec![0.0; n * n];
    let mut blk_b = vec![0.0; n * n];

    for i in 0..nn - 1 {
        let h = nodes[i + 1] - nodes[i];
        let mid = 0.5 * (nodes[i] + nodes[i + 1]);
        let ya = &y[i * n..(i + 1) * n];
        let yb = &y[(i + 1) * n..(i + 2) * n];
        let fa = &f_nodes[i * n..(i + 1) * n];
        let fb = &f_nodes[(i + 1) * n..(i + 2) * n];
        for c in 0..n {
            ym[c] = 0.5 * (ya[c] + yb[c]) - h / 8.0 * (fb[c] - fa[c]);
        }
        rhs_jacobian(system, nodes[i + 1], yb, &mut j_next);
        rhs_jacobian(system, mid, &ym, &mut jm);

        // d ym / d ya = I/2 + h/8 Ja ; d ym / d yb = I/2 - h/8 Jb
        for a in 0..n * n {
            ma[a] = h / 8.0 * j_curr[a];
            mb[a] = -h / 8.0 * j_next[a];
        }
        for d in 0..n {
            ma[d * n + d] += 0.5;
            mb[d * n + d] += 0.5;
        }
        // blk_a = -I - h/6 (Ja + 4 Jm Ma); blk_b = I - h/6 (Jb + 4 Jm Mb)
        for r in 0..n {
            for c in 0..n {
                let mut acc_a = j_curr[r * n + c];
                let mut acc_b = j_next[r * n + c];
                let mut prod_a = 0.0;
                let mut prod_b = 0.0;
                for k in 0..n {
                    prod_a += jm[r * n + k] * ma[k * n + c];
                    prod_b += jm[r * n + k] * mb[k * n + c];
                }
                acc_a += 4.0 * prod_a;
                acc_b += 4.0 * prod_b;
                blk_a[r * n + c] = -h / 6.0 * acc_a - if r == c { 1.0 } else { 0.0 };
                blk_b[r * n + c] = -h / 6.0 * acc_b + if r == c { 1.0 } else { 0.0 };
            }
        }
        let row0 = kl_bc + i * n;
        for r in 0..n {
            for c in 0..n {
                band.set(row0 + r, i * n + c, blk_a[r * n + c]);
                band.set(row0 + r, (i + 1) * n + c, blk_b[r * n + c]);
            }
        }
        std::mem::swap(&mut j_curr, &mut j_next);
    }

    let n_right = system.n_right();
    if n_right > 0 {
        let last = &y[(nn - 1) * n..nn * n];
        bc_jacobian(|v, out| system.eval_right_bc(v, out), last, n_right, &mut jac);
        let row0 = kl_bc + (nn - 1) * n;
        for i in 0..n_right {
            for j in 0..n {
                band.set(row0 + i, (nn - 1) * n + j, jac[i * n + j]);
            }
        }
    }
}

fn newton(system: &OdeSystem, nodes: &[f64], y: &mut [f64], opts: &SolveOptions) -> Result<f64> {
    let n = system.dim();
    let nn = nodes.len();
    let total = nn * n;
    let kl_bc = system.n_left();
    let kl = kl_bc + n - 1;
    let ku = (n - 1).max(2 * n - 1 - kl_bc.min(2 * n - 1));
    let mut band = BandMatrix::new(total, kl, ku);
    let mut ipiv = Vec::new();

    let h_min = nodes
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);

    let mut res = vec![0.0; total];
    compute_residual(system, nodes, y, &mut res);
    let mut rnorm = inf_norm(&res);

    for _iter in 0..opts.max_outer_iterations {
        let ynorm = inf_norm(y);
        // Newton leftover in the collocation equations leaks into the defect
        // amplified by 1/h, hence the h_min factor; the eps floor covers
        // round-off in the residual itself.
        let target = (5e-16 * (1.0 + ynorm)).max(0.02 * opts.tol * h_min.min(1.0));
        if rnorm <= target {
            return Ok(rnorm);
        }
        assemble_jacobian(system, nodes, y, &mut band);
        band.factorize(&mut ipiv)?;
        let mut step = res.clone();
        band.solve(&ipiv, &mut step);
        // step now solves J s = res, so the Newton update is y - s.

        let mut lambda = 1.0;
        let mut accepted = false;
        let mut y_trial = vec![0.0; total];
        let mut res_trial = vec![0.0; total];
        for _bt in 0..=opts.max_backtracks {
            for i in 0..total {
                y_trial[i] = y[i] - lambda * step[i];
            }
            compute_residual(system, nodes, &y_trial, &mut res_trial);
            let rt = inf_norm(&res_trial);
            if rt < rnorm * (1.0 - 1e-4 * lambda) || rt <= target {
                y.copy_from_slice(&y_trial);
                res.copy_from_slice(&res_trial);
                rnorm = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Damping exhausted: accept only if already at round-off level.
            if rnorm <= 1e3 * target {
                return Ok(rnorm);
            }
            return Err(Error::NewtonDivergence {
                residual: rnorm,
                iterations: opts.max_outer_iterations,
            });
        }
    }
    let ynorm = inf_norm(y);
    let target = (5e-16 * (1.0 + ynorm)).max(0.02 * opts.tol * h_min.min(1.0));
    if rnorm <= 1e3 * target {
        return Ok(rnorm);
    }
    Err(Error::NewtonDivergence {
        residual: rnorm,
        iterations: opts.max_outer_iterations,
    })
}

/// Max-norm collocation defect of the Hermite interpolant per interval.
fn interval_defects(system: &OdeSystem, nodes: &[f64], y: &[f64], f_nodes: &[f64]) -> Vec<f64> {
    let n = system.dim();
    let nn = nodes.len();
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut out = Vec::with_capacity(nn - 1);
    for i in 0..nn - 1 {
        let a = nodes[i];
        let h = nodes[i + 1] - a;
        let ya = &y[i * n..(i + 1) * n];
        let yb = &y[(i + 1) * n..(i + 2) * n];
        let fa = &f_nodes[i * n..(i + 1) * n];
        let fb = &f_nodes[(i + 1) * n..(i + 2) * n];
        let mut worst = 0.0f64;
        for &t in DEFECT_SAMPLES.iter() {
            let r = a + t * h;
            let h00 = (2.0 * t - 3.0) * t * t + 1.0;
            let h10 = h * (((t - 2.0) * t + 1.0) * t);
            let h01 = (3.0 - 2.0 * t) * t * t;
            let h11 = h * (t * t * (t - 1.0));
            let d00 = (6.0 * t * t - 6.0 * t) / h;
            let d10 = 3.0 * t * t - 4.0 * t + 1.0;
            let d01 = -d00;
            let d11 = 3.0 * t * t - 2.0 * t;
            for c in 0..n {
                p[c] = h00 * ya[c] + h10 * fa[c] + h01 * yb[c] + h11 * fb[c];
                dp[c] = d00 * ya[c] + d10 * fa[c] + d01 * yb[c] + d11 * fb[c];
            }
            system.eval_rhs(r, &p, &mut f);
            for c in 0..n {
                worst = worst.max((dp[c] - f[c]).abs());
            }
        }
        out.push(worst);
    }
    out
}
