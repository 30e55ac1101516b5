//! Inner-product tables K_j, J_j: bounded solutions of the linear problems
//! L₁U₁ = R, L₁U₂ = ΛR (K family) and L₂Z₁ = ΛR, L₂Z₂ = Λ²R (J family),
//! paired with R, ΛR, Λ²R in radial quadratures. Each family is solved as a
//! single augmented first-order system carrying the vortex profile, both
//! linear solutions, and the four running integrals.

use std::sync::Arc;

use serde::Serialize;

use crate::bvp::{
    augment_with_integrals, solve_bvp, BcFn, BvpSolution, InitialGuess, IntegrandFn, OdeSystem,
    RadialMesh, RhsFn,
};
use crate::error::{Error, Result};
use crate::index::{OperatorKind, OperatorSpec};
use crate::vortex::{lambda2_r_value, lambda_r_value, SpinIndex, VortexProfile};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    K,
    J,
}

impl Family {
    fn operator(self) -> OperatorKind {
        match self {
            Family::K => OperatorKind::L1,
            Family::J => OperatorKind::L2,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::K => write!(f, "K"),
            Family::J => write!(f, "J"),
        }
    }
}

/// Right-hand side of a single linear problem, in transformed variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhsKind {
    Zero,
    R,
    LambdaR,
    Lambda2R,
}

impl RhsKind {
    pub(crate) fn value(self, m: SpinIndex, r: f64, r_tilde: f64, dr_tilde: f64) -> f64 {
        match self {
            RhsKind::Zero => 0.0,
            RhsKind::R => r_tilde,
            RhsKind::LambdaR => lambda_r_value(m, r, r_tilde, dr_tilde),
            RhsKind::Lambda2R => lambda2_r_value(m, r, r_tilde, dr_tilde),
        }
    }
}

#[derive(Clone)]
pub struct LinearBvp {
    pub op: OperatorSpec,
    pub rhs_kind: RhsKind,
    pub r_max: f64,
    pub tol: f64,
}

/// Bounded (generally non-decaying) solution W̃ ~ c + c' r^{-2m}.
pub struct BoundedSolution {
    pub solution: BvpSolution,
    /// |W̃'(r_max) + (2m/r_max) W̃(r_max)| of the returned solution.
    pub abc_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunningRow {
    pub r: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3_first: f64,
    pub v3_second: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InnerProductTable {
    pub m: SpinIndex,
    pub family: Family,
    pub v1: f64,
    pub v2: f64,
    /// mean of the two symmetric cross computations
    pub v3: f64,
    pub v3_first: f64,
    pub v3_second: f64,
    pub det: f64,
    pub trace: f64,
    /// running integrals sampled on the solve mesh, 2π included
    pub running: Vec<RunningRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativityCertificate {
    pub m: SpinIndex,
    pub h1_matrix_negative_definite: bool,
    /// H₂(Ẑ,Ẑ) = (J₁J₂ − J₃²)/J₂ = det(J)/J₂
    pub h2_zhat_value: f64,
    pub zhat_coefficient: f64,
}

/// Solve one linear problem −W̃'' − (2m+1)/r W̃' + (V − δe^{-r})W̃ = g̃ with
/// the bounded-solution truncation W̃'(r_max) + (2m/r_max) W̃(r_max) = 0.
pub fn solve_linear_bvp(bvp: &LinearBvp) -> Result<BoundedSolution> {
    let op = bvp.op.clone();
    if op.profile.r_max() < bvp.r_max {
        return Err(Error::ProfileDomainTooSmall {
            profile_r_max: op.profile.r_max(),
            requested: bvp.r_max,
        });
    }
    let m = op.m;
    let mf = m.f();
    let rhs_kind = bvp.rhs_kind;
    let op_rhs = op.clone();
    let rhs: RhsFn = Arc::new(move |r, y, out| {
        let rt = op_rhs.profile.r_tilde(r).unwrap_or(0.0);
        let dt = op_rhs.profile.r_tilde_prime(r).unwrap_or(0.0);
        let v = op_rhs.potential_from_samples(r, rt, dt)
            - op_rhs.perturbation_delta * (-r).exp();
        out[0] = y[1];
        out[1] = v * y[0] - rhs_kind.value(op_rhs.m, r, rt, dt);
    });
    let left: BcFn = Arc::new(|y0, out| out[0] = y0[1]);
    let r_max = bvp.r_max;
    let right: BcFn = Arc::new(move |yn, out| out[0] = yn[1] + 2.0 * mf / r_max * yn[0]);
    let system = OdeSystem::new(
        2,
        Some(vec![0.0, 0.0, 0.0, -(2.0 * mf + 1.0)]),
        rhs,
        left,
        1,
        right,
        1,
        r_max,
    )
    .expect("linear bvp dimensions are consistent");
    let mesh = RadialMesh::uniform(r_max, (r_max / 0.1).ceil() as usize)?;
    let solution = solve_bvp(&system, &mesh, &InitialGuess::Constant(vec![0.0, 0.0]), bvp.tol)?;

    let nn = solution.mesh().len();
    let sup_w = (0..nn)
        .map(|k| solution.value_at_node(k, 0).abs())
        .fold(0.0f64, f64::max);
    let sup_g = solution
        .mesh()
        .iter()
        .map(|&r| {
            let rt = op.profile.r_tilde(r).unwrap_or(0.0);
            let dt = op.profile.r_tilde_prime(r).unwrap_or(0.0);
            rhs_kind.value(m, r, rt, dt).abs()
        })
        .fold(0.0f64, f64::max);
    if sup_w > 1e6 * sup_g {
        return Err(Error::ResonanceSuspected {
            solution_norm: sup_w,
            rhs_norm: sup_g,
        });
    }
    let w = solution.value_at_node(nn - 1, 0);
    let dw = solution.value_at_node(nn - 1, 1);
    let abc_residual = (dw + 2.0 * mf / r_max * w).abs();
    Ok(BoundedSolution {
        solution,
        abc_residual,
    })
}

/// The coupled 6-dim family system: vortex profile (components 0-1) plus the
/// two linear solutions (2-3, 4-5), with the potential and right-hand sides
/// built from the profile components themselves rather than an interpolant.
fn family_system(
    m: SpinIndex,
    family: Family,
    delta: f64,
    r_max: f64,
) -> OdeSystem {
    let mf = m.f();
    let coeff = match family.operator() {
        OperatorKind::L1 => 3.0,
        OperatorKind::L2 => 1.0,
    };
    let (g1, g2) = match family {
        Family::K => (RhsKind::R, RhsKind::LambdaR),
        Family::J => (RhsKind::LambdaR, RhsKind::Lambda2R),
    };
    let rhs: RhsFn = Arc::new(move |r, y, out| {
        let rt = y[0];
        let dt = y[1];
        let v = coeff * r.powi(2 * m.0 as i32) * rt * (mf * rt + r * dt)
            - delta * (-r).exp();
        out[0] = y[1];
        out[1] = rt - r.powi(2 * m.0 as i32) * rt * rt * rt;
        out[2] = y[3];
        out[3] = v * y[2] - g1.value(m, r, rt, dt);
        out[4] = y[5];
        out[5] = v * y[4] - g2.value(m, r, rt, dt);
    });
    let left: BcFn = Arc::new(|y0, out| {
        out[0] = y0[1];
        out[1] = y0[3];
        out[2] = y0[5];
    });
    let vortex_coeff = 1.0 + (2.0 * mf + 1.0) / (2.0 * r_max);
    let right: BcFn = Arc::new(move |yn, out| {
        out[0] = yn[1] + vortex_coeff * yn[0];
        out[1] = yn[3] + 2.0 * mf / r_max * yn[2];
        out[2] = yn[5] + 2.0 * mf / r_max * yn[4];
    });
    let d = -(2.0 * mf + 1.0);
    let mut s = vec![0.0; 36];
    for b in 0..3 {
        s[(2 * b + 1) * 6 + (2 * b + 1)] = d;
    }
    OdeSystem::new(6, Some(s), rhs, left, 3, right, 3, r_max)
        .expect("family system dimensions are consistent")
}

fn family_integrands(m: SpinIndex, family: Family) -> Vec<IntegrandFn> {
    let p = 2 * m.0 as i32 + 1;
    let (g1, g2) = match family {
        Family::K => (RhsKind::R, RhsKind::LambdaR),
        Family::J => (RhsKind::LambdaR, RhsKind::Lambda2R),
    };
    let pair = move |r: f64, y: &[f64], sol: usize, g: RhsKind| {
        r.powi(p) * y[sol] * g.value(m, r, y[0], y[1])
    };
    vec![
        Arc::new(move |r, y: &[f64]| pair(r, y, 2, g1)),
        Arc::new(move |r, y: &[f64]| pair(r, y, 4, g2)),
        Arc::new(move |r, y: &[f64]| pair(r, y, 2, g2)),
        Arc::new(move |r, y: &[f64]| pair(r, y, 4, g1)),
    ]
}

fn compute_table(
    profile: &Arc<VortexProfile>,
    family: Family,
    delta: f64,
    tol: f64,
) -> Result<InnerProductTable> {
    let m = profile.m();
    if m.get() < 1 {
        return Err(Error::InvalidInput("inner products require m >= 1".into()));
    }
    let r_max = profile.r_max();
    let base = family_system(m, family, delta, r_max);
    let system = augment_with_integrals(&base, family_integrands(m, family));
    let psol = profile.solution().clone();
    let guess = InitialGuess::Function(Arc::new(move |r, out: &mut [f64]| {
        out.fill(0.0);
        let mut p = [0.0; 2];
        psol.evaluate_into(r.min(psol.r_max()), &mut p).unwrap();
        out[0] = p[0];
        out[1] = p[1];
    }));
    let mesh = RadialMesh::uniform(r_max, (r_max / 0.1).ceil() as usize)?;
    let sol = solve_bvp(&system, &mesh, &guess, tol)?;

    let nn = sol.mesh().len();
    let running: Vec<RunningRow> = (0..nn)
        .map(|k| RunningRow {
            r: sol.mesh()[k],
            v1: TWO_PI * sol.value_at_node(k, 6),
            v2: TWO_PI * sol.value_at_node(k, 7),
            v3_first: TWO_PI * sol.value_at_node(k, 8),
            v3_second: TWO_PI * sol.value_at_node(k, 9),
        })
        .collect();
    let last = running.last().unwrap();
    let (v1, v2) = (last.v1, last.v2);
    let (v3_first, v3_second) = (last.v3_first, last.v3_second);
    let v3 = 0.5 * (v3_first + v3_second);
    Ok(InnerProductTable {
        m,
        family,
        v1,
        v2,
        v3,
        v3_first,
        v3_second,
        det: v1 * v2 - v3 * v3,
        trace: v1 + v2,
        running,
    })
}

pub fn compute_k_table(
    profile: &Arc<VortexProfile>,
    delta: f64,
    tol: f64,
) -> Result<InnerProductTable> {
    compute_table(profile, Family::K, delta, tol)
}

pub fn compute_j_table(
    profile: &Arc<VortexProfile>,
    delta: f64,
    tol: f64,
) -> Result<InnerProductTable> {
    compute_table(profile, Family::J, delta, tol)
}

/// Relative variation of each running integral over the last quarter of the
/// domain (max over the four curves), as a fraction of the final value.
pub fn plateau_variation(table: &InnerProductTable) -> f64 {
    let r_lo = 0.75 * table.running.last().unwrap().r;
    let mut worst = 0.0f64;
    for pick in [
        |row: &RunningRow| row.v1,
        |row: &RunningRow| row.v2,
        |row: &RunningRow| row.v3_first,
        |row: &RunningRow| row.v3_second,
    ] {
        let tail: Vec<f64> = table
            .running
            .iter()
            .filter(|row| row.r >= r_lo)
            .map(pick)
            .collect();
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let final_value = *tail.last().unwrap();
        worst = worst.max((hi - lo) / final_value.abs());
    }
    worst
}

pub fn negativity_certificate(
    k: &InnerProductTable,
    j: &InnerProductTable,
) -> Result<NegativityCertificate> {
    if k.m != j.m {
        return Err(Error::InvalidInput("tables belong to different m".into()));
    }
    for t in [k, j] {
        if t.det.abs() < 1e-6 * (t.v1 * t.v1).max(t.v2 * t.v2) {
            return Err(Error::DegenerateMatrix { det: t.det });
        }
    }
    Ok(NegativityCertificate {
        m: k.m,
        h1_matrix_negative_definite: k.trace < 0.0 && k.det > 0.0,
        h2_zhat_value: j.det / j.v2,
        zhat_coefficient: -j.v3 / j.v2,
    })
}

#[derive(Clone, Serialize)]
pub struct SweepEntry {
    pub delta: f64,
    pub k: InnerProductTable,
    pub j: InnerProductTable,
    pub index_l1: usize,
    pub index_l2: usize,
    /// max relative drift of the six table entries vs the δ = 0 baseline
    pub max_drift: f64,
}

pub fn perturbation_sweep(
    profile: &Arc<VortexProfile>,
    deltas: &[f64],
    tol: f64,
) -> Result<Vec<SweepEntry>> {
    for &d in deltas {
        if !(d > 0.0 && d <= 0.05) {
            return Err(Error::InvalidInput(format!(
                "sweep deltas must lie in (0, 0.05], got {d}"
            )));
        }
    }
    let mut out = Vec::with_capacity(deltas.len() + 1);
    for &delta in std::iter::once(&0.0).chain(deltas) {
        let k = compute_k_table(profile, delta, tol)?;
        let j = compute_j_table(profile, delta, tol)?;
        let index_l1 = crate::index::index(&OperatorSpec::new(
            OperatorKind::L1,
            profile.clone(),
            delta,
        )?)?;
        let index_l2 = crate::index::index(&OperatorSpec::new(
            OperatorKind::L2,
            profile.clone(),
            delta,
        )?)?;
        let max_drift = if out.is_empty() {
            0.0
        } else {
            let base: &SweepEntry = &out[0];
            [
                (k.v1, base.k.v1),
                (k.v2, base.k.v2),
                (k.v3, base.k.v3),
                (j.v1, base.j.v1),
                (j.v2, base.j.v2),
                (j.v3, base.j.v3),
            ]
            .iter()
            .map(|&(a, b)| (a - b).abs() / b.abs())
            .fold(0.0f64, f64::max)
        };
        out.push(SweepEntry {
            delta,
            k,
            j,
            index_l1,
            index_l2,
            max_drift,
        });
    }
    Ok(out)
}
