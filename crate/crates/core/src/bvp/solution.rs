use crate::error::{Error, Result};

/// 10-point Gauss-Legendre rule on [-1, 1]; exact for polynomials up to
/// degree 19, which covers the piecewise-polynomial integrands used here.
pub(crate) const GL10_NODES: [f64; 10] = [
    -0.973906528517171720,
    -0.865063366688984511,
    -0.679409568299024406,
    -0.433395394129247191,
    -0.148874338981631211,
    0.148874338981631211,
    0.433395394129247191,
    0.679409568299024406,
    0.865063366688984511,
    0.973906528517171720,
];
pub(crate) const GL10_WEIGHTS: [f64; 10] = [
    0.066671344308688138,
    0.149451349150580593,
    0.219086362515982044,
    0.269266719309996355,
    0.295524224714752870,
    0.295524224714752870,
    0.269266719309996355,
    0.219086362515982044,
    0.149451349150580593,
    0.066671344308688138,
];

/// Collocation solution: nodal values and derivatives plus the cubic Hermite
/// interpolant they induce (the Lobatto collocation polynomial itself).
#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    mesh: Vec<f64>,
    dim: usize,
    /// node-major: values[node * dim + component]
    values: Vec<f64>,
    derivatives: Vec<f64>,
    residual_norm: f64,
}

impl BvpSolution {
    /// Assemble a solution object from external samples (e.g. a rescaled
    /// profile); `values` and `derivatives` are node-major.
    pub fn new(
        mesh: Vec<f64>,
        dim: usize,
        values: Vec<f64>,
        derivatives: Vec<f64>,
        residual_norm: f64,
    ) -> Result<Self> {
        if mesh.len() < 2 || !mesh.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("mesh must be strictly increasing with >= 2 nodes".into()));
        }
        if values.len() != mesh.len() * dim || derivatives.len() != mesh.len() * dim {
            return Err(Error::InvalidInput("sample arrays do not match mesh size".into()));
        }
        Ok(Self::from_parts(mesh, dim, values, derivatives, residual_norm))
    }

    pub(crate) fn from_parts(
        mesh: Vec<f64>,
        dim: usize,
        values: Vec<f64>,
        derivatives: Vec<f64>,
        residual_norm: f64,
    ) -> Self {
        debug_assert_eq!(values.len(), mesh.len() * dim);
        debug_assert_eq!(derivatives.len(), mesh.len() * dim);
        BvpSolution {
            mesh,
            dim,
            values,
            derivatives,
            residual_norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn r_max(&self) -> f64 {
        *self.mesh.last().unwrap()
    }

    /// Maximal sampled collocation defect of the accepted solve.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn value_at_node(&self, node: usize, component: usize) -> f64 {
        self.values[node * self.dim + component]
    }

    pub fn derivative_at_node(&self, node: usize, component: usize) -> f64 {
        self.derivatives[node * self.dim + component]
    }

    fn find_interval(&self, r: f64) -> usize {
        // rightmost interval whose left node is <= r
        match self.mesh.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => i.min(self.mesh.len() - 2),
            Err(i) => i - 1,
        }
    }

    /// Piecewise-cubic interpolant; collocates nodal values and derivatives.
    pub fn evaluate(&self, r: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(r, &mut out)?;
        Ok(out)
    }

    pub fn evaluate_into(&self, r: f64, out: &mut [f64]) -> Result<()> {
        self.hermite(r, out, false)
    }

    pub fn evaluate_derivative_into(&self, r: f64, out: &mut [f64]) -> Result<()> {
        self.hermite(r, out, true)
    }

    pub fn component(&self, r: f64, component: usize) -> Result<f64> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(r, &mut out)?;
        Ok(out[component])
    }

    pub fn component_derivative(&self, r: f64, component: usize) -> Result<f64> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_derivative_into(r, &mut out)?;
        Ok(out[component])
    }

    fn hermite(&self, r: f64, out: &mut [f64], derivative: bool) -> Result<()> {
        let r_max = self.r_max();
        if !(0.0..=r_max).contains(&r) || r.is_nan() {
            return Err(Error::OutOfDomain { r, r_max });
        }
        let i = self.find_interval(r);
        let a = self.mesh[i];
        let h = self.mesh[i + 1] - a;
        let t = (r - a) / h;
        let n = self.dim;
        let (ya, yb) = (&self.values[i * n..(i + 1) * n], &self.values[(i + 1) * n..(i + 2) * n]);
        let (fa, fb) = (
            &self.derivatives[i * n..(i + 1) * n],
            &self.derivatives[(i + 1) * n..(i + 2) * n],
        );
        if derivative {
            let d00 = (6.0 * t * t - 6.0 * t) / h;
            let d10 = 3.0 * t * t - 4.0 * t + 1.0;
            let d01 = -d00;
            let d11 = 3.0 * t * t - 2.0 * t;
            for c in 0..n {
                out[c] = d00 * ya[c] + d10 * fa[c] + d01 * yb[c] + d11 * fb[c];
            }
        } else {
            let h00 = (2.0 * t - 3.0) * t * t + 1.0;
            let h10 = h * (((t - 2.0) * t + 1.0) * t);
            let h01 = (3.0 - 2.0 * t) * t * t;
            let h11 = h * (t * t * (t - 1.0));
            for c in 0..n {
                out[c] = h00 * ya[c] + h10 * fa[c] + h01 * yb[c] + h11 * fb[c];
            }
        }
        Ok(())
    }

    /// Integrate `g(r, y(r))` over the whole domain with per-interval
    /// Gauss-Legendre quadrature of the interpolant, optionally splitting
    /// intervals at extra breakpoints (e.g. cutoff corners).
    pub fn integrate(&self, g: impl Fn(f64, &[f64]) -> f64) -> f64 {
        self.integrate_with_breaks(g, &[])
    }

    pub fn integrate_with_breaks(&self, g: impl Fn(f64, &[f64]) -> f64, breaks: &[f64]) -> f64 {
        let n = self.dim;
        let mut y = vec![0.0; n];
        let mut total = 0.0;
        for i in 0..self.mesh.len() - 1 {
            let (a, b) = (self.mesh[i], self.mesh[i + 1]);
            let mut pieces = vec![a];
            for &x in breaks {
                if x > a && x < b {
                    pieces.push(x);
                }
            }
            pieces.push(b);
            pieces.sort_by(|p, q| p.partial_cmp(q).unwrap());
            for w in pieces.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                let mut acc = 0.0;
                for (xi, wi) in GL10_NODES.iter().zip(GL10_WEIGHTS.iter()) {
                    let r = mid + half * xi;
                    self.hermite(r, &mut y, false).unwrap();
                    acc += wi * g(r, &y);
                }
                total += acc * half;
            }
        }
        total
    }
}
