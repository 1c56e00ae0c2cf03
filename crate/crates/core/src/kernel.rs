//! Kernel generating distances for the factorization geometry.
//!
//! The kernel is a linear combination of
//! `h1(U, Z) = ((||U||_F^2 + ||Z||_F^2) / 2)^2` and
//! `h2(U, Z) = (||U||_F^2 + ||Z||_F^2) / 2`,
//! optionally augmented with an extra quadratic on one block. The quartic
//! part carries the U-Z coupling that makes the data term smooth adaptable.

use crate::error::{Error, Result};
use crate::matrix::FactorPair;
use crate::problem::{DataTerm, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    c1: f64,
    c2: f64,
    aug_u: f64,
    aug_z: f64,
}

impl KernelSpec {
    pub fn new(c1: f64, c2: f64, aug_u: f64, aug_z: f64) -> Result<Self> {
        if c1 < 0.0 || c2 < 0.0 || aug_u < 0.0 || aug_z < 0.0 {
            return Err(Error::InvalidInput("kernel coefficients must be nonnegative".into()));
        }
        Ok(KernelSpec { c1, c2, aug_u, aug_z })
    }

    /// Euclidean kernel `1/2 (||U||^2 + ||Z||^2)`.
    pub fn euclidean() -> Self {
        KernelSpec { c1: 0.0, c2: 1.0, aug_u: 0.0, aug_z: 0.0 }
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn aug_u(&self) -> f64 {
        self.aug_u
    }

    pub fn aug_z(&self) -> f64 {
        self.aug_z
    }

    /// Strong convexity modulus `sigma = c2 + min(aug_u, aug_z)`; the
    /// inertial method requires it positive.
    pub fn strong_convexity(&self) -> f64 {
        self.c2 + self.aug_u.min(self.aug_z)
    }

    pub fn value(&self, x: &FactorPair) -> f64 {
        let half = 0.5 * x.fro_norm_sq();
        self.c1 * half * half
            + self.c2 * half
            + 0.5 * self.aug_u * x.u.fro_norm_sq()
            + 0.5 * self.aug_z * x.z.fro_norm_sq()
    }

    /// `grad h = ((c1 (||U||^2 + ||Z||^2) + c2 + aug_u) U,
    ///            (c1 (||U||^2 + ||Z||^2) + c2 + aug_z) Z)`.
    pub fn grad(&self, x: &FactorPair) -> FactorPair {
        let s = x.fro_norm_sq();
        FactorPair {
            u: x.u.scale(self.c1 * s + self.c2 + self.aug_u),
            z: x.z.scale(self.c1 * s + self.c2 + self.aug_z),
        }
    }

    /// `D_h(x, y) = h(x) - h(y) - <grad h(y), x - y>`, nonnegative by
    /// convexity of h.
    pub fn bregman_distance(&self, x: &FactorPair, y: &FactorPair) -> Result<f64> {
        let diff = x.sub(y)?;
        let gy = self.grad(y);
        Ok(self.value(x) - self.value(y) - gy.fro_inner(&diff)?)
    }
}

/// The kernel under which the problem's smooth part is L-smad with L = 1:
/// `c1 = 3` always, `c2` from the data term, and a quadratic augmentation on
/// the opposite block when exactly one block carries an L2 weight (that
/// augmentation is what turns the mixed-regularization scalar equation back
/// into a cubic at unit step).
pub fn kernel_for_problem(p: &ProblemSpec) -> KernelSpec {
    let c2 = match p.data() {
        DataTerm::Full { a } => a.fro_norm(),
        DataTerm::Masked { a } => a.values_fro_norm(),
        DataTerm::GraphReg { a, lap, mu0 } => a.fro_norm() + mu0 * lap.fro_norm(),
        DataTerm::SymPenalty { a, lam0 } => a.fro_norm() + 2.0 * lam0,
    };
    let (w_u, w_z) = (p.reg_u().l2, p.reg_z().l2);
    let (aug_u, aug_z) = if w_u > 0.0 && w_z == 0.0 {
        (0.0, w_u)
    } else if w_z > 0.0 && w_u == 0.0 {
        (w_z, 0.0)
    } else {
        (0.0, 0.0)
    };
    KernelSpec { c1: 3.0, c2, aug_u, aug_z }
}
