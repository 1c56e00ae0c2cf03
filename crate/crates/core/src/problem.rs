//! Objective definitions `Psi = f + g`: the smooth data-fitting term g with
//! its gradient, and the separable nonsmooth regularization f.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FactorPair, MaskedMatrix};
use crate::svd::singular_values;

/// Smooth data-fitting term variants.
#[derive(Debug, Clone)]
pub enum DataTerm {
    /// `1/2 ||A - UZ||_F^2`.
    Full { a: DenseMatrix },
    /// `1/2 ||P_Omega(A - UZ)||_F^2`, summed over the observed entries only.
    Masked { a: MaskedMatrix },
    /// Full term plus the graph penalty `mu0/2 * tr(U^T L U)`.
    GraphReg { a: DenseMatrix, lap: DenseMatrix, mu0: f64 },
    /// Full term plus the non-symmetric relaxation penalty
    /// `lam0/2 ||U - Z^T||_F^2`; requires a square A.
    SymPenalty { a: DenseMatrix, lam0: f64 },
}

impl DataTerm {
    fn dims(&self) -> (usize, usize) {
        match self {
            DataTerm::Full { a } => a.shape(),
            DataTerm::Masked { a } => a.shape(),
            DataTerm::GraphReg { a, .. } => a.shape(),
            DataTerm::SymPenalty { a, .. } => a.shape(),
        }
    }
}

/// Separable per-block regularization. At most one nonsmooth piece per block
/// (the published closed forms cover exactly these combinations); the L2
/// weight combines with any of them, and nonnegativity combines with L1 or
/// the sparsity constraint.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockReg {
    pub l2: f64,
    pub l1: f64,
    pub nuclear: f64,
    pub nonneg: bool,
    pub sparsity: Option<usize>,
}

impl BlockReg {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn l2(w: f64) -> Self {
        BlockReg { l2: w, ..Self::default() }
    }

    pub fn l1(w: f64) -> Self {
        BlockReg { l1: w, ..Self::default() }
    }

    pub fn nuclear(w: f64) -> Self {
        BlockReg { nuclear: w, ..Self::default() }
    }

    pub fn nonneg() -> Self {
        BlockReg { nonneg: true, ..Self::default() }
    }

    pub fn sparsity(s: usize) -> Self {
        BlockReg { sparsity: Some(s), ..Self::default() }
    }

    pub fn with_nonneg(mut self) -> Self {
        self.nonneg = true;
        self
    }

    pub fn with_l2(mut self, w: f64) -> Self {
        self.l2 = w;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l2 < 0.0 || self.l1 < 0.0 || self.nuclear < 0.0 {
            return Err(Error::InvalidInput("negative regularization weight".into()));
        }
        if let Some(s) = self.sparsity {
            if s == 0 {
                return Err(Error::InvalidInput("sparsity target must be >= 1".into()));
            }
        }
        let nonsmooth =
            usize::from(self.l1 > 0.0) + usize::from(self.nuclear > 0.0) + usize::from(self.sparsity.is_some());
        if nonsmooth > 1 {
            return Err(Error::Unsupported(
                "at most one of L1, nuclear, sparsity per block".into(),
            ));
        }
        if self.nuclear > 0.0 && self.nonneg {
            return Err(Error::Unsupported(
                "nuclear norm combined with nonnegativity has no closed form".into(),
            ));
        }
        Ok(())
    }

    /// Regularizer value at one block; +inf when a constraint is violated.
    pub fn value(&self, x: &DenseMatrix) -> f64 {
        if self.nonneg && x.data().iter().any(|&v| v < 0.0) {
            return f64::INFINITY;
        }
        if let Some(s) = self.sparsity {
            let nnz = x.data().iter().filter(|&&v| v != 0.0).count();
            if nnz > s {
                return f64::INFINITY;
            }
        }
        let mut acc = 0.0;
        if self.l2 > 0.0 {
            acc += 0.5 * self.l2 * x.fro_norm_sq();
        }
        if self.l1 > 0.0 {
            let mut l1 = 0.0;
            for v in x.data() {
                l1 += v.abs();
            }
            acc += self.l1 * l1;
        }
        if self.nuclear > 0.0 {
            let sv = singular_values(x).expect("Jacobi SVD converges at desk scale");
            acc += self.nuclear * sv.iter().sum::<f64>();
        }
        acc
    }

    /// Semi-convexity modulus of this block's regularizer: 0 for every convex
    /// combination here, unavailable for the hard sparsity constraint.
    fn semi_convexity(&self) -> Option<f64> {
        if self.sparsity.is_some() {
            None
        } else {
            Some(0.0)
        }
    }
}

/// One matrix-factorization problem instance: data term, per-block
/// regularizers, and dimensions (M, N, K).
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    data: DataTerm,
    reg_u: BlockReg,
    reg_z: BlockReg,
    dims: (usize, usize, usize),
}

impl ProblemSpec {
    pub fn new(data: DataTerm, reg_u: BlockReg, reg_z: BlockReg, k: usize) -> Result<Self> {
        reg_u.validate()?;
        reg_z.validate()?;
        if k == 0 {
            return Err(Error::InvalidInput("inner dimension K must be >= 1".into()));
        }
        let (m, n) = data.dims();
        match &data {
            DataTerm::GraphReg { lap, mu0, .. } => {
                if lap.shape() != (m, m) {
                    return Err(Error::ShapeMismatch("GraphReg Laplacian must be M x M"));
                }
                if *mu0 <= 0.0 {
                    return Err(Error::InvalidInput("graph weight mu0 must be > 0".into()));
                }
            }
            DataTerm::SymPenalty { lam0, .. } => {
                if m != n {
                    return Err(Error::ShapeMismatch("SymPenalty requires a square A"));
                }
                if *lam0 <= 0.0 {
                    return Err(Error::InvalidInput("symmetry weight lam0 must be > 0".into()));
                }
            }
            _ => {}
        }
        Ok(ProblemSpec { data, reg_u, reg_z, dims: (m, n, k) })
    }

    pub fn data(&self) -> &DataTerm {
        &self.data
    }

    pub fn reg_u(&self) -> &BlockReg {
        &self.reg_u
    }

    pub fn reg_z(&self) -> &BlockReg {
        &self.reg_z
    }

    /// (M, N, K).
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    fn check_shapes(&self, x: &FactorPair) {
        let (m, n, k) = self.dims;
        assert_eq!(x.u.shape(), (m, k), "U shape does not match the problem");
        assert_eq!(x.z.shape(), (k, n), "Z shape does not match the problem");
    }

    /// Smooth part g at x.
    pub fn smooth_value(&self, x: &FactorPair) -> f64 {
        self.check_shapes(x);
        match &self.data {
            DataTerm::Full { a } => residual_half_norm_sq(a, x),
            DataTerm::Masked { a } => {
                let mut acc = 0.0;
                for &(i, j, v) in a.entries() {
                    let r = v - predict(x, i, j);
                    acc += r * r;
                }
                0.5 * acc
            }
            DataTerm::GraphReg { a, lap, mu0 } => {
                // tr(U^T L U) evaluated as <L U, U>.
                let lu = lap.gemm(&x.u).expect("shapes validated");
                let graph = lu.fro_inner(&x.u).expect("shapes validated");
                residual_half_norm_sq(a, x) + 0.5 * mu0 * graph
            }
            DataTerm::SymPenalty { a, lam0 } => {
                let w = x.u.sub(&x.z.transpose()).expect("square problem");
                residual_half_norm_sq(a, x) + 0.5 * lam0 * w.fro_norm_sq()
            }
        }
    }

    /// Gradient of g, blockwise: (M x K, K x N).
    pub fn smooth_grad(&self, x: &FactorPair) -> FactorPair {
        self.check_shapes(x);
        match &self.data {
            DataTerm::Full { a } => full_grad(a, x),
            DataTerm::Masked { a } => {
                let (m, n, k) = self.dims;
                let mut gu = DenseMatrix::zeros(m, k);
                let mut gz = DenseMatrix::zeros(k, n);
                for &(i, j, v) in a.entries() {
                    let r = v - predict(x, i, j);
                    for l in 0..k {
                        gu.data_mut()[i * k + l] -= r * x.z.at(l, j);
                        gz.data_mut()[l * n + j] -= r * x.u.at(i, l);
                    }
                }
                FactorPair { u: gu, z: gz }
            }
            DataTerm::GraphReg { a, lap, mu0 } => {
                let mut g = full_grad(a, x);
                let lu = lap.gemm(&x.u).expect("shapes validated");
                let ltu = lap.gemm_tn(&x.u).expect("shapes validated");
                g.u = g
                    .u
                    .add_scaled(0.5 * mu0, &lu)
                    .and_then(|m| m.add_scaled(0.5 * mu0, &ltu))
                    .expect("shapes validated");
                g
            }
            DataTerm::SymPenalty { a, lam0 } => {
                let mut g = full_grad(a, x);
                let w = x.u.sub(&x.z.transpose()).expect("square problem");
                g.u = g.u.add_scaled(*lam0, &w).expect("shapes validated");
                g.z = g.z.add_scaled(-*lam0, &w.transpose()).expect("shapes validated");
                g
            }
        }
    }

    /// Nonsmooth part f at x; +inf when a constraint is violated.
    pub fn nonsmooth_value(&self, x: &FactorPair) -> f64 {
        self.reg_u.value(&x.u) + self.reg_z.value(&x.z)
    }

    /// `Psi(x) = g(x) + f(x)`.
    pub fn objective(&self, x: &FactorPair) -> f64 {
        self.smooth_value(x) + self.nonsmooth_value(x)
    }

    /// `D_g(x, y) = g(x) - g(y) - <grad g(y), x - y>`; may be negative.
    pub fn dg_bregman(&self, x: &FactorPair, y: &FactorPair) -> f64 {
        let gy = self.smooth_grad(y);
        let diff = x.sub(y).expect("conformable iterates");
        self.smooth_value(x)
            - self.smooth_value(y)
            - gy.fro_inner(&diff).expect("conformable iterates")
    }

    /// Same as [`dg_bregman`](Self::dg_bregman) with g(y) and its gradient
    /// already at hand (the backtracking loops reuse them).
    pub fn dg_bregman_cached(
        &self,
        x: &FactorPair,
        y: &FactorPair,
        g_y: f64,
        grad_y: &FactorPair,
    ) -> f64 {
        let diff = x.sub(y).expect("conformable iterates");
        self.smooth_value(x) - g_y - grad_y.fro_inner(&diff).expect("conformable iterates")
    }

    /// Semi-convexity modulus of f: `Some(0)` for the convex catalog, `None`
    /// when a hard sparsity constraint is present (the inertial method then
    /// refuses to run).
    pub fn semi_convexity(&self) -> Option<f64> {
        match (self.reg_u.semi_convexity(), self.reg_z.semi_convexity()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        }
    }
}

fn predict(x: &FactorPair, i: usize, j: usize) -> f64 {
    let k = x.inner_dim();
    let mut acc = 0.0;
    for l in 0..k {
        acc += x.u.at(i, l) * x.z.at(l, j);
    }
    acc
}

fn residual_half_norm_sq(a: &DenseMatrix, x: &FactorPair) -> f64 {
    let r = a.sub(&x.product()).expect("data and product shapes agree");
    0.5 * r.fro_norm_sq()
}

fn full_grad(a: &DenseMatrix, x: &FactorPair) -> FactorPair {
    // grad = (-(A - UZ) Z^T, -U^T (A - UZ))
    let r = a.sub(&x.product()).expect("data and product shapes agree");
    let gu = r.gemm_nt(&x.z).expect("shapes agree").scale(-1.0);
    let gz = x.u.gemm_tn(&r).expect("shapes agree").scale(-1.0);
    FactorPair { u: gu, z: gz }
}
