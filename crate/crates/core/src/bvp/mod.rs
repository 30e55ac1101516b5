//! Two-point boundary value problems for first-order systems
//!
//!   dy/dr = (1/r) S y + f(r, y)   on [0, r_max],
//!
//! with a constant matrix `S` carrying the r^-1 singularity at the origin,
//! solved by nonlinear collocation (3-point Lobatto, order 4) with damped
//! Newton iteration and adaptive mesh refinement.

mod band;
mod solution;
mod solver;

pub use band::{invert_dense, solve_dense, BandMatrix};
pub use solution::BvpSolution;
pub use solver::{solve_bvp, solve_bvp_with, SolveOptions};

use crate::error::{Error, Result};
use std::sync::Arc;

pub type RhsFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type BcFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type IntegrandFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// First-order ODE system `y' = (1/r) S y + f(r, y)` with boundary conditions
/// split between the endpoints. Regularity at the origin requires
/// `S y(0) = 0`, which the left boundary conditions must enforce.
#[derive(Clone)]
pub struct OdeSystem {
    dim: usize,
    singular: Option<Arc<Vec<f64>>>,
    /// (I - S)^-1, used for the limit form of the right-hand side at r = 0.
    dinv: Option<Arc<Vec<f64>>>,
    rhs: RhsFn,
    left_bc: BcFn,
    n_left: usize,
    right_bc: BcFn,
    n_right: usize,
    r_max: f64,
}

impl OdeSystem {
    /// `singular` is the row-major constant matrix `S`, or `None` when the
    /// system has no 1/r term. The boundary-condition residual dimensions
    /// must sum to the system dimension.
    pub fn new(
        dim: usize,
        singular: Option<Vec<f64>>,
        rhs: RhsFn,
        left_bc: BcFn,
        n_left: usize,
        right_bc: BcFn,
        n_right: usize,
        r_max: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("system dimension must be positive".into()));
        }
        if n_left + n_right != dim {
            return Err(Error::InvalidInput(format!(
                "boundary condition dimensions {n_left} + {n_right} != system dimension {dim}"
            )));
        }
        if !(r_max > 0.0) {
            return Err(Error::InvalidInput(format!("r_max = {r_max} must be positive")));
        }
        if let Some(s) = &singular {
            if s.len() != dim * dim {
                return Err(Error::InvalidInput("singular matrix has wrong shape".into()));
            }
        }
        let dinv = match &singular {
            Some(s) => {
                // I - S
                let mut m = vec![0.0; dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        m[i * dim + j] = if i == j { 1.0 } else { 0.0 } - s[i * dim + j];
                    }
                }
                Some(Arc::new(invert_dense(&m, dim)?))
            }
            None => None,
        };
        Ok(OdeSystem {
            dim,
            singular: singular.map(Arc::new),
            dinv,
            rhs,
            left_bc,
            n_left,
            right_bc,
            n_right,
            r_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    /// Full right-hand side including the singular term; at r = 0 the limit
    /// form `(I - S)^-1 f(0, y)` replaces the indeterminate S y / r.
    pub fn eval_rhs(&self, r: f64, y: &[f64], out: &mut [f64]) {
        (self.rhs)(r, y, out);
        let n = self.dim;
        match (&self.singular, &self.dinv) {
            (Some(s), Some(dinv)) => {
                if r == 0.0 {
                    let mut tmp = vec![0.0; n];
                    for i in 0..n {
                        let mut acc = 0.0;
                        for j in 0..n {
                            acc += dinv[i * n + j] * out[j];
                        }
                        tmp[i] = acc;
                    }
                    out.copy_from_slice(&tmp);
                } else {
                    let rinv = 1.0 / r;
                    for i in 0..n {
                        let mut acc = 0.0;
                        for j in 0..n {
                            acc += s[i * n + j] * y[j];
                        }
                        out[i] += acc * rinv;
                    }
                }
            }
            _ => {}
        }
    }

    pub(crate) fn eval_left_bc(&self, y0: &[f64], out: &mut [f64]) {
        (self.left_bc)(y0, out);
    }

    pub(crate) fn eval_right_bc(&self, yn: &[f64], out: &mut [f64]) {
        (self.right_bc)(yn, out);
    }
}

/// Append running-integral components `w_k' = g_k(r, y)`, `w_k(0) = 0`, so
/// that `w_k(r_max)` is the integral of `g_k` over the domain. The original
/// components and boundary conditions are unchanged.
pub fn augment_with_integrals(system: &OdeSystem, integrands: Vec<IntegrandFn>) -> OdeSystem {
    if integrands.is_empty() {
        return system.clone();
    }
    let n = system.dim;
    let k = integrands.len();
    let total = n + k;

    let singular = system.singular.as_ref().map(|s| {
        let mut ext = vec![0.0; total * total];
        for i in 0..n {
            for j in 0..n {
                ext[i * total + j] = s[i * n + j];
            }
        }
        ext
    });

    let base_rhs = system.rhs.clone();
    let integrands = Arc::new(integrands);
    let ints = integrands.clone();
    let rhs: RhsFn = Arc::new(move |r, y, out| {
        (base_rhs)(r, &y[..n], &mut out[..n]);
        for (idx, g) in ints.iter().enumerate() {
            out[n + idx] = g(r, &y[..n]);
        }
    });

    let base_left = system.left_bc.clone();
    let n_left = system.n_left;
    let left_bc: BcFn = Arc::new(move |y0, out| {
        (base_left)(&y0[..n], &mut out[..n_left]);
        for idx in 0..k {
            out[n_left + idx] = y0[n + idx];
        }
    });

    let base_right = system.right_bc.clone();
    let n_right = system.n_right;
    let right_bc: BcFn = Arc::new(move |yn, out| {
        (base_right)(&yn[..n], &mut out[..n_right]);
    });

    OdeSystem::new(
        total,
        singular,
        rhs,
        left_bc,
        n_left + k,
        right_bc,
        n_right,
        system.r_max,
    )
    .expect("augmented system dimensions are consistent by construction")
}

/// Strictly increasing node sequence from 0 to r_max.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    nodes: Vec<f64>,
}

impl RadialMesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("mesh needs at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidInput("mesh must start at r = 0".into()));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("mesh nodes must be strictly increasing".into()));
        }
        Ok(RadialMesh { nodes })
    }

    pub fn uniform(r_max: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 || !(r_max > 0.0) {
            return Err(Error::InvalidInput("uniform mesh needs r_max > 0 and intervals > 0".into()));
        }
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|i| r_max * i as f64 / intervals as f64)
            .collect();
        nodes[0] = 0.0;
        *nodes.last_mut().unwrap() = r_max;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }
}

/// Starting iterate for the Newton solve.
#[derive(Clone)]
pub enum InitialGuess {
    /// The same value vector at every node.
    Constant(Vec<f64>),
    /// Sampled per node; must fill a slice of the system dimension.
    Function(Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>),
    /// A previous solution, re-sampled on the new mesh (clamped to its domain).
    Solution(BvpSolution),
}

impl InitialGuess {
    pub(crate) fn sample(&self, r: f64, out: &mut [f64]) {
        match self {
            InitialGuess::Constant(v) => out.copy_from_slice(v),
            InitialGuess::Function(f) => f(r, out),
            InitialGuess::Solution(sol) => {
                let rc = r.min(sol.r_max());
                sol.evaluate_into(rc, out).expect("clamped point is inside the domain");
            }
        }
    }
}

impl From<BvpSolution> for InitialGuess {
    fn from(sol: BvpSolution) -> Self {
        InitialGuess::Solution(sol)
    }
}
