//! Truncated almost-self-similar vortex profiles P̃_b: solutions of the
//! b²r²/4-modified profile equation on [0, (1−η)R_b] with a Dirichlet right
//! endpoint, obtained by continuation in b from the vortex, together with
//! their mass/energy/truncation-residual diagnostics.

use std::sync::Arc;

use serde::Serialize;

use crate::bvp::{solve_bvp, BcFn, BvpSolution, InitialGuess, OdeSystem, RadialMesh, RhsFn};
use crate::error::{Error, Result};
use crate::vortex::{solve_vortex, SpinIndex, VortexProfile, INITIAL_SPACING};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// First b value on the continuation path (domain ≈ 36, comfortably inside
/// the vortex solver's reach) and the initial continuation step.
const CONTINUATION_START: f64 = 0.05;
const CONTINUATION_STEP: f64 = 0.05;
const MIN_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SelfSimilarParams {
    pub m: SpinIndex,
    pub b: f64,
    pub eta: f64,
}

impl SelfSimilarParams {
    pub fn new(m: SpinIndex, b: f64, eta: f64) -> Result<Self> {
        if !(b > 0.0 && b <= 0.3) {
            return Err(Error::InvalidInput(format!(
                "rate parameter b must lie in (0, 0.3], got {b}"
            )));
        }
        if !(0.05..=0.3).contains(&eta) {
            return Err(Error::InvalidInput(format!(
                "truncation margin eta must lie in [0.05, 0.3], got {eta}"
            )));
        }
        Ok(Self { m, b, eta })
    }

    /// Right endpoint of the truncated domain, (1−η)R_b.
    pub fn r_end(&self) -> f64 {
        (1.0 - self.eta) * radius_rb(self.b, self.m)
    }
}

/// R_b = (1/b)·√(2 + 2√(1 + b²m²)), the edge of the uniformly elliptic
/// region of the modified profile equation; always ≥ 2/b.
pub fn radius_rb(b: f64, m: SpinIndex) -> f64 {
    let mf = m.f();
    (2.0 + 2.0 * (1.0 + b * b * mf * mf).sqrt()).sqrt() / b.abs()
}

/// Weighted sup-norms of the truncation residual Ψ_b over the cutoff
/// annulus, with weights 1, r, r².
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualNorms {
    pub sup: f64,
    pub sup_weight_r: f64,
    pub sup_weight_r2: f64,
}

/// Quintic-smoothstep cutoff: 1 below `inner` = (1−η)²R_b, 0 above
/// `outer` = (1−η)R_b, C² across both joints.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    pub fn for_params(params: &SelfSimilarParams) -> Self {
        let rb = radius_rb(params.b, params.m);
        let s = 1.0 - params.eta;
        Cutoff {
            inner: s * s * rb,
            outer: s * rb,
        }
    }

    fn t(&self, r: f64) -> f64 {
        (r - self.inner) / (self.outer - self.inner)
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.inner {
            1.0
        } else if r >= self.outer {
            0.0
        } else {
            let t = self.t(r);
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        if r <= self.inner || r >= self.outer {
            0.0
        } else {
            let t = self.t(r);
            let u = 1.0 - t;
            -30.0 * t * t * u * u / (self.outer - self.inner)
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        if r <= self.inner || r >= self.outer {
            0.0
        } else {
            let t = self.t(r);
            let w = self.outer - self.inner;
            -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w)
        }
    }
}

pub struct SelfSimilarProfile {
    pub params: SelfSimilarParams,
    /// Transformed profile P̃ (physical P = r^m P̃) on [0, (1−η)R_b].
    pub solution: BvpSolution,
    /// Mass 2π∫|φ_b P|² r dr of the cut-off profile.
    pub mass: f64,
    /// Energy ∫|∇Q̃|² − ½∫|Q̃|⁴ of Q̃ = e^{imθ}e^{−ibr²/4}φ_b P; the
    /// quadratic phase contributes (b²/4)∫r²|Q̃|² to the gradient term.
    pub energy: f64,
    pub residual_norms: ResidualNorms,
}

impl SelfSimilarProfile {
    pub fn r_end(&self) -> f64 {
        self.params.r_end()
    }

    pub fn p_tilde(&self, r: f64) -> Result<f64> {
        self.solution.component(r, 0)
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff::for_params(&self.params)
    }
}

/// Solve the transformed truncated profile equation
/// P̃'' + (2m+1)/r P̃' − (1 − b²r²/4) P̃ + r^{2m} P̃³ = 0
/// with P̃'(0) = 0 and P̃(r_end) = 0. b = 0 is admitted (the vortex
/// equation with a Dirichlet truncation).
pub fn solve_dirichlet(
    m: SpinIndex,
    b: f64,
    r_end: f64,
    tol: f64,
    guess: &InitialGuess,
) -> Result<BvpSolution> {
    if b < 0.0 || !(r_end > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need b >= 0 and r_end > 0, got b={b}, r_end={r_end}"
        )));
    }
    let p = 2 * m.get() as i32;
    let rhs: RhsFn = Arc::new(move |r, y, out| {
        out[0] = y[1];
        out[1] = (1.0 - 0.25 * b * b * r * r) * y[0] - r.powi(p) * y[0] * y[0] * y[0];
    });
    let left: BcFn = Arc::new(|y0, out| out[0] = y0[1]);
    let right: BcFn = Arc::new(|yn, out| out[0] = yn[0]);
    let system = OdeSystem::new(
        2,
        Some(vec![0.0, 0.0, 0.0, -(2.0 * m.f() + 1.0)]),
        rhs,
        left,
        1,
        right,
        1,
        r_end,
    )
    .expect("profile system dimensions are consistent");
    let mesh = RadialMesh::uniform(r_end, (r_end / INITIAL_SPACING).ceil() as usize)?;
    solve_bvp(&system, &mesh, guess, tol)
}

fn guess_from(solution: &BvpSolution) -> InitialGuess {
    let prev = solution.clone();
    InitialGuess::Function(Arc::new(move |r, out: &mut [f64]| {
        prev.evaluate_into(r.min(prev.r_max()), out).unwrap();
    }))
}

/// A step is accepted only if Newton converged to a profile that is
/// positive in the interior and did not collapse to zero.
fn accept(m: SpinIndex, sol: &BvpSolution) -> bool {
    let n = sol.mesh().len();
    let mut peak = 0.0f64;
    for k in 0..n {
        let r = sol.mesh()[k];
        let pt = sol.value_at_node(k, 0);
        peak = peak.max(r.powi(m.get() as i32) * pt);
        if k > 0 && k + 1 < n && pt < 0.0 {
            return false;
        }
    }
    peak > 1e-3
}

/// Continuation in b from the vortex profile (the b = 0 endpoint of the
/// family) up to the requested rate parameter.
pub fn solve_selfsim(params: SelfSimilarParams, tol: f64) -> Result<SelfSimilarProfile> {
    let m = params.m;
    let b_first = params.b.min(CONTINUATION_START);
    let eta = params.eta;
    let r_end_first = (1.0 - eta) * radius_rb(b_first, m);
    let vortex = solve_vortex(m, r_end_first.max(30.0), tol)?;
    let mut guess = guess_from(vortex.solution());

    let mut b_cur = 0.0;
    let mut b_next = b_first;
    let mut step = CONTINUATION_STEP;
    let mut current: Option<BvpSolution> = None;
    loop {
        let r_end = (1.0 - eta) * radius_rb(b_next, m);
        match solve_dirichlet(m, b_next, r_end, tol, &guess) {
            Ok(sol) if accept(m, &sol) => {
                b_cur = b_next;
                guess = guess_from(&sol);
                current = Some(sol);
                if b_cur >= params.b {
                    break;
                }
                b_next = (b_cur + step).min(params.b);
            }
            Ok(_) | Err(Error::NewtonDivergence { .. }) => {
                step *= 0.5;
                if step < MIN_STEP {
                    return Err(Error::ContinuationStall { b: b_next, step });
                }
                b_next = (b_cur + step).min(params.b);
                if current.is_none() && b_next >= b_first {
                    // the very first solve failed: retreat below it
                    b_next = b_first * 0.5;
                }
            }
            Err(e) => return Err(e),
        }
    }
    let solution = current.expect("loop exits only after a successful solve");
    let cut = Cutoff::for_params(&params);
    let mass = profile_mass(&params, &solution, &cut);
    let energy = profile_energy(&params, &solution, &cut);
    let residual_norms = residual_from_parts(&params, &solution, &cut);
    Ok(SelfSimilarProfile {
        params,
        solution,
        mass,
        energy,
        residual_norms,
    })
}

fn profile_mass(params: &SelfSimilarParams, sol: &BvpSolution, cut: &Cutoff) -> f64 {
    let p = 2 * params.m.get() as i32 + 1;
    let c = *cut;
    TWO_PI
        * sol.integrate_with_breaks(
            |r, y| {
                let phi = c.value(r);
                r.powi(p) * phi * phi * y[0] * y[0]
            },
            &[c.inner],
        )
}

fn profile_energy(params: &SelfSimilarParams, sol: &BvpSolution, cut: &Cutoff) -> f64 {
    let m = params.m.get() as i32;
    let mf = params.m.f();
    let b = params.b;
    let c = *cut;
    let kinetic = sol.integrate_with_breaks(
        |r, y| {
            let phi = c.value(r);
            let dphi = c.d1(r);
            let core = r * dphi * y[0] + phi * (mf * y[0] + r * y[1]);
            let angular = mf * phi * y[0];
            r.powi(2 * m - 1) * (core * core + angular * angular)
                + 0.25 * b * b * r.powi(2 * m + 3) * phi * phi * y[0] * y[0]
        },
        &[c.inner],
    );
    let quartic = sol.integrate_with_breaks(
        |r, y| {
            let phi = c.value(r);
            r.powi(4 * m + 1) * (phi * y[0]).powi(4)
        },
        &[c.inner],
    );
    TWO_PI * kinetic - std::f64::consts::PI * quartic
}

/// Pointwise truncation residual of the cut-off physical profile,
/// Ψ = Δ(φP) − (1 + m²/r² − b²r²/4)(φP) + (φP)³ − φ·[same applied to P];
/// since P solves the equation this collapses to
/// φ''P + 2φ'P' + φ'P/r + (φ³ − φ)P³, supported on the cutoff annulus.
fn residual_at(params: &SelfSimilarParams, sol: &BvpSolution, cut: &Cutoff, r: f64) -> f64 {
    let m = params.m.get() as i32;
    let mf = params.m.f();
    let mut y = [0.0; 2];
    sol.evaluate_into(r, &mut y).expect("r inside the domain");
    let p = r.powi(m) * y[0];
    let dp = r.powi(m - 1) * (mf * y[0] + r * y[1]);
    let phi = cut.value(r);
    cut.d2(r) * p + 2.0 * cut.d1(r) * dp + cut.d1(r) * p / r + (phi * phi * phi - phi) * p * p * p
}

fn residual_from_parts(
    params: &SelfSimilarParams,
    sol: &BvpSolution,
    cut: &Cutoff,
) -> ResidualNorms {
    let samples = 4000;
    let mut norms = ResidualNorms {
        sup: 0.0,
        sup_weight_r: 0.0,
        sup_weight_r2: 0.0,
    };
    for k in 0..=samples {
        let r = cut.inner + (cut.outer - cut.inner) * k as f64 / samples as f64;
        let psi = residual_at(params, sol, cut, r).abs();
        norms.sup = norms.sup.max(psi);
        norms.sup_weight_r = norms.sup_weight_r.max(r * psi);
        norms.sup_weight_r2 = norms.sup_weight_r2.max(r * r * psi);
    }
    norms
}

/// Recompute the weighted truncation-residual norms of a solved profile.
pub fn truncation_residual(profile: &SelfSimilarProfile) -> ResidualNorms {
    residual_from_parts(&profile.params, &profile.solution, &profile.cutoff())
}

/// ¼∫|x|²|Q|² of a vortex profile — the quadrature side of d_m.
pub fn mass_moment_quadrature(profile: &VortexProfile) -> f64 {
    let p = 2 * profile.m().get() as i32 + 3;
    0.25 * TWO_PI
        * profile
            .solution()
            .integrate(|r, y| r.powi(p) * y[0] * y[0])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DmEstimate {
    pub d_quadrature: f64,
    pub d_finite_difference: f64,
}

/// d_m = ∂(mass)/∂(b²) at b = 0, estimated two ways: the quadrature
/// ¼∫|x|²|Q|² on the vortex, and a finite difference of the truncated
/// profile masses at b = 0.02 and 0.04.
pub fn mass_derivative_dm(m: SpinIndex, eta: f64, tol: f64) -> Result<DmEstimate> {
    let vortex = solve_vortex(m, 50.0, tol)?;
    let d_quadrature = mass_moment_quadrature(&vortex);
    let (b1, b2) = (0.02, 0.04);
    let mass1 = solve_selfsim(SelfSimilarParams::new(m, b1, eta)?, tol)?.mass;
    let mass2 = solve_selfsim(SelfSimilarParams::new(m, b2, eta)?, tol)?.mass;
    Ok(DmEstimate {
        d_quadrature,
        d_finite_difference: (mass2 - mass1) / (b2 * b2 - b1 * b1),
    })
}

/// Least-squares line y ≈ slope·x + intercept; returns (slope, intercept, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}
