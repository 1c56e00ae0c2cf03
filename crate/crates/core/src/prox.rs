//! Closed-form solutions of the Bregman proximal subproblem
//!
//! ```text
//!   argmin_{U,Z}  step * f(U, Z) + <P, U> + <Q, Z> + h(U, Z)
//! ```
//!
//! for the supported regularizer catalog, plus the scalar root solvers the
//! closed forms reduce to and the elementwise/spectral shrinkage operators.
//!
//! Every variant follows the same two-stage reduction: a block direction is
//! obtained by applying the block's shrinkage operator to `-P` (resp. `-Q`),
//! and the block magnitudes come from a monotone scalar equation. When both
//! blocks see the same effective quadratic coefficient that equation is the
//! cubic `c1 * s * r^3 + c2eff * r - 1 = 0`; otherwise it is a fifth-order
//! equation solved on its strictly monotone rational form.
//!
//! A block's effective quadratic coefficient is `c2 + step * l2 + aug`: the
//! L2 weight enters scaled by the step because the subproblem scales the
//! whole nonsmooth part by it, exactly like the L1 threshold. The
//! brute-force minimizer in [`crate::verify`] pins this scaling down — the
//! unscaled variant misses the true minimizer for any step below 1.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::matrix::{DenseMatrix, FactorPair};
use crate::problem::BlockReg;
use crate::svd::jacobi_svd;

/// Residual target for the cubic: `|c1 s r^3 + c2eff r - 1| <= tol * (1 + c2eff)`.
const CUBIC_RESIDUAL: f64 = 1e-13;
/// Residual target for the rational quintic form: `|psi(r)| <= tol * (1 + r)`.
const QUINTIC_RESIDUAL: f64 = 1e-12;

/// One Bregman proximal subproblem instance.
#[derive(Debug, Clone)]
pub struct ProxInput {
    /// Linear coefficient on the U block (M x K).
    pub p_mat: DenseMatrix,
    /// Linear coefficient on the Z block (K x N).
    pub q_mat: DenseMatrix,
    pub kernel: KernelSpec,
    /// Step parameter (lambda or tau) multiplying f; must be positive.
    pub step: f64,
    pub reg_u: BlockReg,
    pub reg_z: BlockReg,
}

impl ProxInput {
    pub fn validate(&self) -> Result<()> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::InvalidInput("prox step must be positive".into()));
        }
        if self.p_mat.cols() != self.q_mat.rows() {
            return Err(Error::ShapeMismatch("ProxInput: P and Q inner dimension"));
        }
        self.reg_u.validate()?;
        self.reg_z.validate()
    }

    /// Effective quadratic coefficients per block: the kernel's `c2`, the
    /// step-scaled L2 weight of f, and the kernel augmentation.
    pub fn block_coefficients(&self) -> (f64, f64) {
        let a_u = self.kernel.c2() + self.step * self.reg_u.l2 + self.kernel.aug_u();
        let a_z = self.kernel.c2() + self.step * self.reg_z.l2 + self.kernel.aug_z();
        (a_u, a_z)
    }

    /// Value of the subproblem objective at a candidate point (the quantity
    /// the oracle equivalence checks compare). +inf when the candidate
    /// violates a constraint.
    pub fn objective(&self, x: &FactorPair) -> Result<f64> {
        let f = self.reg_u.value(&x.u) + self.reg_z.value(&x.z);
        if f.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let lin = self.p_mat.fro_inner(&x.u)? + self.q_mat.fro_inner(&x.z)?;
        Ok(self.step * f + lin + self.kernel.value(x))
    }
}

/// Soft-thresholding `S_theta(y) = max(|y| - theta, 0) * sgn(y)`.
pub fn soft_threshold(m: &DenseMatrix, theta: f64) -> DenseMatrix {
    debug_assert!(theta >= 0.0);
    m.map(|v| (v.abs() - theta).max(0.0) * v.signum())
}

/// Hard-thresholding: keep the `s` largest-magnitude entries, zero the rest.
/// Ties at the cutoff keep the earlier row-major index.
pub fn hard_threshold(m: &DenseMatrix, s: usize) -> DenseMatrix {
    if s >= m.numel() {
        return m.clone();
    }
    let mut idx: Vec<usize> = (0..m.numel()).collect();
    idx.sort_by(|&a, &b| {
        m.data()[b]
            .abs()
            .partial_cmp(&m.data()[a].abs())
            .expect("entries are finite")
            .then(a.cmp(&b))
    });
    let mut out = vec![0.0; m.numel()];
    for &i in idx.iter().take(s) {
        out[i] = m.data()[i];
    }
    DenseMatrix::from_raw(m.rows(), m.cols(), out)
}

/// Elementwise projection onto the nonnegative orthant.
pub fn nonneg_project(m: &DenseMatrix) -> DenseMatrix {
    m.map(|v| v.max(0.0))
}

/// Singular value shrinkage `D_t(Q) = U S_t(Sigma) V^T`.
pub fn svd_shrink(m: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    debug_assert!(t >= 0.0);
    let svd = jacobi_svd(m)?;
    let shrunk: Vec<f64> = svd.sigma.iter().map(|&s| (s - t).max(0.0)).collect();
    Ok(svd.reconstruct_with(&shrunk))
}

/// Nonnegative root of `c1 * s * r^3 + c2eff * r - 1 = 0`.
///
/// The polynomial is strictly increasing on `r >= 0` and negative at zero,
/// so the root is unique; bracketing bisection followed by Newton polishing
/// is globally safe.
pub fn solve_cubic_scale(s: f64, c1: f64, c2eff: f64) -> Result<f64> {
    if s < 0.0 || c1 < 0.0 || c2eff < 0.0 {
        return Err(Error::InvalidInput("cubic coefficients must be nonnegative".into()));
    }
    let cub = c1 * s;
    if cub == 0.0 && c2eff == 0.0 {
        return Err(Error::DegenerateSubproblem("cubic"));
    }
    if cub == 0.0 {
        return Ok(1.0 / c2eff);
    }
    let f = |r: f64| cub * r * r * r + c2eff * r - 1.0;
    let fp = |r: f64| 3.0 * cub * r * r + c2eff;
    let mut lo = 0.0;
    let mut hi = if c2eff > 0.0 { (1.0 / c2eff).min(1.0 / cub.cbrt()) } else { 1.0 / cub.cbrt() };
    // Guard against rounding in the analytic upper bound.
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-3 * hi {
            break;
        }
    }
    let mut r = 0.5 * (lo + hi);
    let target = CUBIC_RESIDUAL * (1.0 + c2eff);
    for _ in 0..60 {
        let val = f(r);
        if val.abs() <= target {
            break;
        }
        let step = val / fp(r);
        let next = r - step;
        r = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if f(r) < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
    }
    if f(r).abs() > 10.0 * target {
        return Err(Error::RootSolve("cubic residual did not converge"));
    }
    Ok(r)
}

/// Root of the mixed-regularization scalar equation in its rational form
///
/// ```text
///   psi(r1) = c1 * (pnorm^2 / (r1 + lam0)^2 + qnorm^2 / r1^2) + c2 - r1 = 0,
/// ```
///
/// which is strictly decreasing on `r1 > 0`. Clearing denominators gives the
/// fifth-order polynomial the mixed case is usually stated as; both forms
/// have the same positive root. Requires `qnorm > 0` (a vanished Z-block
/// direction is handled by the caller through a reduced one-block cubic).
pub fn solve_r1_quintic(c1: f64, c2: f64, lam0: f64, pnorm: f64, qnorm: f64) -> Result<f64> {
    if c1 < 0.0 || c2 < 0.0 || lam0 < 0.0 || pnorm < 0.0 {
        return Err(Error::InvalidInput("quintic coefficients must be nonnegative".into()));
    }
    if qnorm <= 0.0 {
        return Err(Error::InvalidInput(
            "solve_r1_quintic requires qnorm > 0; use the one-block cubic instead".into(),
        ));
    }
    if c1 == 0.0 && c2 == 0.0 {
        return Err(Error::DegenerateSubproblem("quintic"));
    }
    let psi = |r: f64| {
        let pu = r + lam0;
        c1 * (pnorm * pnorm / (pu * pu) + qnorm * qnorm / (r * r)) + c2 - r
    };
    let dpsi = |r: f64| {
        let pu = r + lam0;
        -2.0 * c1 * (pnorm * pnorm / (pu * pu * pu) + qnorm * qnorm / (r * r * r)) - 1.0
    };
    // The root satisfies r1 >= c2 and r1^3 >= c1 * qnorm^2.
    let mut lo = c2.max((c1 * qnorm * qnorm).cbrt()).max(f64::MIN_POSITIVE);
    let mut hi = lo.max(1e-12);
    while psi(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::RootSolve("quintic bracket expansion diverged"));
        }
    }
    if psi(lo) < 0.0 {
        // lo is already past the root (possible only through rounding).
        lo = hi / 2.0;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if psi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-3 * hi {
            break;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..60 {
        let val = psi(r);
        if val.abs() <= QUINTIC_RESIDUAL * (1.0 + r) {
            break;
        }
        let next = r - val / dpsi(r);
        r = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if psi(r) > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
    }
    if psi(r).abs() > 10.0 * QUINTIC_RESIDUAL * (1.0 + r) {
        return Err(Error::RootSolve("quintic residual did not converge"));
    }
    Ok(r)
}

/// Same root as [`solve_r1_quintic`], found on the coefficient-expanded
/// fifth-order polynomial instead of the rational form. Kept as an
/// independent route for parity testing.
pub fn solve_r1_quintic_poly(c1: f64, c2: f64, lam0: f64, pnorm: f64, qnorm: f64) -> Result<f64> {
    if qnorm <= 0.0 {
        return Err(Error::InvalidInput("solve_r1_quintic_poly requires qnorm > 0".into()));
    }
    if c1 == 0.0 && c2 == 0.0 {
        return Err(Error::DegenerateSubproblem("quintic"));
    }
    let (p2, q2, d) = (pnorm * pnorm, qnorm * qnorm, lam0);
    // -r^5 + (c2 - 2d) r^4 + (2 c2 d - d^2) r^3
    //   + (c1 (p^2 + q^2) + c2 d^2) r^2 + 2 c1 q^2 d r + c1 q^2 d^2
    let coeffs = [
        c1 * q2 * d * d,
        2.0 * c1 * q2 * d,
        c1 * (p2 + q2) + c2 * d * d,
        2.0 * c2 * d - d * d,
        c2 - 2.0 * d,
        -1.0,
    ];
    let eval = |r: f64| {
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * r + c;
        }
        acc
    };
    let deriv = |r: f64| {
        let mut acc = 0.0;
        for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * r + k as f64 * c;
        }
        acc
    };
    // Same lower bound as the rational form; it separates the true root from
    // the spurious roots the denominator clearing introduces at 0 and -lam0.
    let mut lo = c2.max((c1 * q2).cbrt()).max(f64::MIN_POSITIVE);
    let mut hi = lo.max(1e-12);
    while eval(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::RootSolve("quintic bracket expansion diverged"));
        }
    }
    if eval(lo) < 0.0 {
        lo = hi / 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..40 {
        let val = eval(r);
        if val == 0.0 {
            break;
        }
        let dv = deriv(r);
        if dv == 0.0 {
            break;
        }
        let next = r - val / dv;
        if next <= lo || next >= hi || !next.is_finite() {
            break;
        }
        if (next - r).abs() <= 1e-16 * r {
            r = next;
            break;
        }
        r = next;
    }
    Ok(r)
}

/// The block's shrinkage direction: the appropriate operator applied to `-P`
/// with step-scaled parameters. The identity covers both the unregularized
/// and the pure-L2 blocks (an L2 weight only shifts the scalar equation).
pub fn block_direction(p: &DenseMatrix, reg: &BlockReg, step: f64) -> Result<DenseMatrix> {
    let neg = p.scale(-1.0);
    let dir = match (reg.l1 > 0.0, reg.nuclear > 0.0, reg.sparsity, reg.nonneg) {
        (true, _, _, false) => soft_threshold(&neg, step * reg.l1),
        // nonneg + L1: project -(P + step*l1*ones)
        (true, _, _, true) => p.map(|v| (-(v + step * reg.l1)).max(0.0)),
        (_, true, _, _) => svd_shrink(&neg, step * reg.nuclear)?,
        (_, _, Some(s), false) => hard_threshold(&neg, s),
        (_, _, Some(s), true) => hard_threshold(&nonneg_project(&neg), s),
        (_, _, None, true) => nonneg_project(&neg),
        _ => neg,
    };
    Ok(dir)
}

/// Solve the subproblem: directions from the shrinkage operators, magnitudes
/// from the scalar equation.
pub fn bpg_prox(input: &ProxInput) -> Result<FactorPair> {
    prox_with_solver(input, false)
}

/// Alternative route that always uses the coefficient-expanded fifth-order
/// polynomial for the two-block magnitude solve. Agrees with [`bpg_prox`] to
/// solver precision; used for parity testing of the mixed-regularization
/// closed forms.
pub fn bpg_prox_via_quintic(input: &ProxInput) -> Result<FactorPair> {
    prox_with_solver(input, true)
}

fn prox_with_solver(input: &ProxInput, force_poly: bool) -> Result<FactorPair> {
    input.validate()?;
    let du = block_direction(&input.p_mat, &input.reg_u, input.step)?;
    let dz = block_direction(&input.q_mat, &input.reg_z, input.step)?;
    let (a_u, a_z) = input.block_coefficients();
    let c1 = input.kernel.c1();
    let p = du.fro_norm();
    let q = dz.fro_norm();

    if p == 0.0 && q == 0.0 {
        // The subproblem reduces to minimizing h, whose unique minimizer is
        // the origin unless the kernel vanishes entirely.
        if c1 == 0.0 && a_u == 0.0 && a_z == 0.0 {
            return Err(Error::DegenerateSubproblem("bpg_prox"));
        }
        return Ok(FactorPair { u: du.scale(0.0), z: dz.scale(0.0) });
    }

    let same_coeff = (a_u - a_z).abs() <= 1e-14 * (1.0 + a_u.abs() + a_z.abs());
    if same_coeff && !force_poly {
        let r = solve_cubic_scale(p * p + q * q, c1, a_u)?;
        return Ok(FactorPair { u: du.scale(r), z: dz.scale(r) });
    }

    // Two distinct quadratic coefficients. Orient so the larger one plays
    // the shifted role; a vanished direction reduces to a one-block cubic.
    if q == 0.0 {
        let r = solve_cubic_scale(p * p, c1, a_u)?;
        return Ok(FactorPair { u: du.scale(r), z: dz.scale(0.0) });
    }
    if p == 0.0 {
        let r = solve_cubic_scale(q * q, c1, a_z)?;
        return Ok(FactorPair { u: du.scale(0.0), z: dz.scale(r) });
    }
    let (base, delta, swap) =
        if a_u >= a_z { (a_z, a_u - a_z, false) } else { (a_u, a_z - a_u, true) };
    let (pn, qn) = if swap { (q, p) } else { (p, q) };
    let r1 = if force_poly {
        solve_r1_quintic_poly(c1, base, delta, pn, qn)?
    } else {
        solve_r1_quintic(c1, base, delta, pn, qn)?
    };
    let (scale_u, scale_z) =
        if swap { (1.0 / r1, 1.0 / (r1 + delta)) } else { (1.0 / (r1 + delta), 1.0 / r1) };
    Ok(FactorPair { u: du.scale(scale_u), z: dz.scale(scale_z) })
}

/// Euclidean proximal map of one block regularizer with step `t`:
/// `argmin_x  reg(x) + 1/(2t) ||x - v||^2`. Used by the alternating
/// baselines and by the projected-gradient reference solver.
pub fn euclid_prox(v: &DenseMatrix, reg: &BlockReg, t: f64) -> Result<DenseMatrix> {
    debug_assert!(t > 0.0);
    // The L2 weight contracts the input; the remaining piece acts on the
    // contracted point with a contracted threshold.
    let shrink = 1.0 / (1.0 + t * reg.l2);
    let out = match (reg.l1 > 0.0, reg.nuclear > 0.0, reg.sparsity, reg.nonneg) {
        (true, _, _, false) => soft_threshold(&v.scale(shrink), t * reg.l1 * shrink),
        (true, _, _, true) => v.map(|x| ((x - t * reg.l1) * shrink).max(0.0)),
        (_, true, _, _) => svd_shrink(&v.scale(shrink), t * reg.nuclear * shrink)?,
        (_, _, Some(s), false) => hard_threshold(v, s).scale(shrink),
        (_, _, Some(s), true) => hard_threshold(&nonneg_project(v), s).scale(shrink),
        (_, _, None, true) => nonneg_project(v).scale(shrink),
        _ => v.scale(shrink),
    };
    Ok(out)
}
