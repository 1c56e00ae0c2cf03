//! Independent numerical oracles for the closed forms and inequalities the
//! solvers rely on.
//!
//! The oracles deliberately use different algorithms than the main path —
//! a dense 2D grid refined by Newton on the stationarity system, and plain
//! projected gradient descent on the raw subproblem — so agreement is
//! evidence rather than tautology.

use crate::error::{Error, Result};
use crate::kernel::{kernel_for_problem, KernelSpec};
use crate::matrix::{DenseMatrix, FactorPair};
use crate::problem::{BlockReg, DataTerm, ProblemSpec};
use crate::prox::{
    bpg_prox, euclid_prox, hard_threshold, nonneg_project, soft_threshold,
    solve_cubic_scale, solve_r1_quintic, solve_r1_quintic_poly, svd_shrink, ProxInput,
};
use crate::rng::SplitMix64;

/// Instance-size cap for the brute-force subproblem oracle.
const ORACLE_SIZE_CAP: usize = 200;
const ORACLE_GRID: usize = 400;
const ORACLE_NEWTON_ITERS: usize = 50;

/// Outcome of one verification suite. `passed` holds exactly when
/// `worst_violation <= tolerance`.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: String,
}

impl CheckReport {
    fn new(name: impl Into<String>, samples: usize, worst: f64, tol: f64, details: String) -> Self {
        CheckReport {
            name: name.into(),
            samples,
            worst_violation: worst,
            tolerance: tol,
            passed: worst <= tol,
            details,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} (samples {}, worst violation {:.3e}, tolerance {:.1e}) {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.samples,
            self.worst_violation,
            self.tolerance,
            self.details,
        )
    }
}

/// Brute-force minimizer of the subproblem: directions from the shrinkage
/// lemmas (dispatched independently of the prox module), magnitudes from a
/// dense grid over the reduced two-dimensional problem refined by Newton on
/// its stationarity system.
pub fn subproblem_oracle(input: &ProxInput) -> Result<FactorPair> {
    input.validate()?;
    let size = input.p_mat.numel() + input.q_mat.numel();
    if size > ORACLE_SIZE_CAP {
        return Err(Error::InstanceTooLarge { size, cap: ORACLE_SIZE_CAP });
    }
    let du = oracle_direction(&input.p_mat, &input.reg_u, input.step)?;
    let dz = oracle_direction(&input.q_mat, &input.reg_z, input.step)?;
    let c1 = input.kernel.c1();
    let a_u = input.kernel.c2() + input.step * input.reg_u.l2 + input.kernel.aug_u();
    let a_z = input.kernel.c2() + input.step * input.reg_z.l2 + input.kernel.aug_z();
    let p = du.fro_norm();
    let q = dz.fro_norm();

    let (t1, t2) = minimize_reduced(p, q, c1, a_u, a_z);
    let u = if p > 0.0 { du.scale(t1 / p) } else { du.scale(0.0) };
    let z = if q > 0.0 { dz.scale(t2 / q) } else { dz.scale(0.0) };
    Ok(FactorPair { u, z })
}

/// The reduced problem `min_{t >= 0} -t1 p - t2 q + c1 ((t1^2+t2^2)/2)^2
/// + a_u t1^2/2 + a_z t2^2/2`, solved by grid search plus Newton.
fn minimize_reduced(p: f64, q: f64, c1: f64, a_u: f64, a_z: f64) -> (f64, f64) {
    if p == 0.0 && q == 0.0 {
        return (0.0, 0.0);
    }
    let obj = |t1: f64, t2: f64| {
        let s = t1 * t1 + t2 * t2;
        -t1 * p - t2 * q + 0.25 * c1 * s * s + 0.5 * a_u * t1 * t1 + 0.5 * a_z * t2 * t2
    };
    let bound = |norm: f64, a: f64| -> f64 {
        if norm == 0.0 {
            return 0.0;
        }
        let mut b = f64::INFINITY;
        if a > 0.0 {
            b = b.min(norm / a);
        }
        if c1 > 0.0 {
            b = b.min((norm / c1).cbrt());
        }
        b
    };
    let r = bound(p, a_u).max(bound(q, a_z)) * 1.05 + 1e-12;

    let mut best = (0.0, 0.0);
    let mut best_val = obj(0.0, 0.0);
    let step = r / ORACLE_GRID as f64;
    for i in 0..=ORACLE_GRID {
        let t1 = i as f64 * step;
        for j in 0..=ORACLE_GRID {
            let t2 = j as f64 * step;
            let v = obj(t1, t2);
            if v < best_val {
                best_val = v;
                best = (t1, t2);
            }
        }
    }

    // Newton on the stationarity system, with a vanished linear coefficient
    // pinning its block at zero.
    let (mut t1, mut t2) = best;
    if p == 0.0 {
        t1 = 0.0;
    }
    if q == 0.0 {
        t2 = 0.0;
    }
    for _ in 0..ORACLE_NEWTON_ITERS {
        let s = t1 * t1 + t2 * t2;
        let g1 = c1 * s * t1 + a_u * t1 - p;
        let g2 = c1 * s * t2 + a_z * t2 - q;
        match (p > 0.0, q > 0.0) {
            (true, true) => {
                let j11 = c1 * (3.0 * t1 * t1 + t2 * t2) + a_u;
                let j22 = c1 * (t1 * t1 + 3.0 * t2 * t2) + a_z;
                let j12 = 2.0 * c1 * t1 * t2;
                let det = j11 * j22 - j12 * j12;
                if det.abs() < 1e-300 {
                    break;
                }
                t1 -= (j22 * g1 - j12 * g2) / det;
                t2 -= (j11 * g2 - j12 * g1) / det;
            }
            (true, false) => {
                let j11 = c1 * 3.0 * t1 * t1 + a_u;
                if j11 == 0.0 {
                    break;
                }
                t1 -= g1 / j11;
            }
            (false, true) => {
                let j22 = c1 * 3.0 * t2 * t2 + a_z;
                if j22 == 0.0 {
                    break;
                }
                t2 -= g2 / j22;
            }
            (false, false) => break,
        }
        t1 = t1.max(0.0);
        t2 = t2.max(0.0);
    }
    if obj(t1, t2) <= best_val {
        (t1, t2)
    } else {
        best
    }
}

/// Lemma-operator dispatch written out independently of the prox module's
/// table, so a dispatch bug there cannot be masked here.
fn oracle_direction(p: &DenseMatrix, reg: &BlockReg, step: f64) -> Result<DenseMatrix> {
    if reg.nuclear > 0.0 {
        return svd_shrink(&p.scale(-1.0), step * reg.nuclear);
    }
    if let Some(s) = reg.sparsity {
        let base = if reg.nonneg { nonneg_project(&p.scale(-1.0)) } else { p.scale(-1.0) };
        return Ok(hard_threshold(&base, s));
    }
    if reg.l1 > 0.0 {
        if reg.nonneg {
            // shift by the scaled threshold, then project
            let shifted = p.map(|v| -(v + step * reg.l1));
            return Ok(nonneg_project(&shifted));
        }
        return Ok(soft_threshold(&p.scale(-1.0), step * reg.l1));
    }
    if reg.nonneg {
        return Ok(nonneg_project(&p.scale(-1.0)));
    }
    Ok(p.scale(-1.0))
}

/// Monotone projected/proximal gradient descent on the raw subproblem,
/// a third route used to cross-check the oracle itself on a handful of
/// instances. Convex regularizers only.
pub fn subproblem_projected_gradient(input: &ProxInput, iters: usize) -> Result<FactorPair> {
    input.validate()?;
    let (m, k) = input.p_mat.shape();
    let n = input.q_mat.cols();
    // f scaled by the prox step, as it appears in the subproblem objective
    let scaled_u = BlockReg {
        l2: input.step * input.reg_u.l2,
        l1: input.step * input.reg_u.l1,
        nuclear: input.step * input.reg_u.nuclear,
        ..input.reg_u
    };
    let scaled_z = BlockReg {
        l2: input.step * input.reg_z.l2,
        l1: input.step * input.reg_z.l1,
        nuclear: input.step * input.reg_z.nuclear,
        ..input.reg_z
    };
    let smooth = |x: &FactorPair| -> Result<f64> {
        Ok(input.p_mat.fro_inner(&x.u)? + input.q_mat.fro_inner(&x.z)? + input.kernel.value(x))
    };
    let mut x = FactorPair::zeros(m, n, k);
    let mut t = 1.0 / (1.0 + input.kernel.c2());
    for _ in 0..iters {
        let gh = input.kernel.grad(&x);
        let grad = FactorPair { u: gh.u.add(&input.p_mat)?, z: gh.z.add(&input.q_mat)? };
        let smooth_x = smooth(&x)?;
        // sufficient-decrease backtracking on the smooth part
        let cand = loop {
            let cu = euclid_prox(&x.u.add_scaled(-t, &grad.u)?, &scaled_u, t)?;
            let cz = euclid_prox(&x.z.add_scaled(-t, &grad.z)?, &scaled_z, t)?;
            let cand = FactorPair { u: cu, z: cz };
            let d = cand.sub(&x)?;
            let quad = smooth_x + grad.fro_inner(&d)? + d.fro_norm_sq() / (2.0 * t);
            if smooth(&cand)? <= quad + 1e-15 * (1.0 + quad.abs()) || t < 1e-300 {
                break cand;
            }
            t *= 0.5;
        };
        let moved = cand.sub(&x)?.fro_norm();
        x = cand;
        if moved <= 1e-15 * (1.0 + x.fro_norm()) {
            break;
        }
        t *= 1.1;
    }
    Ok(x)
}

/// Central finite differences against the analytic gradient; relative error
/// per point is the max entry deviation over `1 + max |grad|`.
pub fn grad_check(p: &ProblemSpec, n: usize, seed: u64) -> CheckReport {
    let (m, nn, k) = p.dims();
    let mut rng = SplitMix64::new(seed);
    let mut worst: f64 = 0.0;
    let mut worst_at = 0usize;
    for sample in 0..n {
        let x = random_pair(m, nn, k, &mut rng, 1.0);
        let g = p.smooth_grad(&x);
        let h = 1e-5 * (1.0 + x.fro_norm());
        let gmax = g.u.data().iter().chain(g.z.data()).fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut err: f64 = 0.0;
        for block in 0..2 {
            let len = if block == 0 { x.u.numel() } else { x.z.numel() };
            for idx in 0..len {
                let mut plus = x.clone();
                let mut minus = x.clone();
                if block == 0 {
                    plus.u.data_mut()[idx] += h;
                    minus.u.data_mut()[idx] -= h;
                } else {
                    plus.z.data_mut()[idx] += h;
                    minus.z.data_mut()[idx] -= h;
                }
                let fd = (p.smooth_value(&plus) - p.smooth_value(&minus)) / (2.0 * h);
                let exact = if block == 0 { g.u.data()[idx] } else { g.z.data()[idx] };
                err = err.max((fd - exact).abs());
            }
        }
        let rel = err / (1.0 + gmax);
        if rel > worst {
            worst = rel;
            worst_at = sample;
        }
    }
    CheckReport::new(
        "gradient-vs-finite-differences",
        n,
        worst,
        1e-5,
        format!("worst sample {worst_at}"),
    )
}

/// Sampled convexity of `L h - g` and `L h + g`: second central differences
/// along random unit directions must be nonnegative within noise.
pub fn lsmad_check(
    p: &ProblemSpec,
    kernel: &KernelSpec,
    l: f64,
    n: usize,
    seed: u64,
) -> CheckReport {
    let (m, nn, k) = p.dims();
    let mut rng = SplitMix64::new(seed);
    let mut worst: f64 = 0.0;
    let mut min_curv = f64::INFINITY;
    for _ in 0..n {
        let x = random_pair(m, nn, k, &mut rng, 1.0);
        let mut d = random_pair(m, nn, k, &mut rng, 1.0);
        let dn = d.fro_norm();
        if dn == 0.0 {
            continue;
        }
        d = d.scale(1.0 / dn);
        let delta = 1e-4 * (1.0 + x.fro_norm());
        let plus = x.add_scaled(delta, &d).expect("conformable");
        let minus = x.add_scaled(-delta, &d).expect("conformable");
        for sign in [1.0f64, -1.0] {
            // sign = +1 checks L h - g, sign = -1 checks L h + g
            let phi = |y: &FactorPair| l * kernel.value(y) - sign * p.smooth_value(y);
            let (a, b, c) = (phi(&plus), phi(&x), phi(&minus));
            let curv = (a - 2.0 * b + c) / (delta * delta);
            let scale = 1.0 + a.abs() + b.abs() + c.abs();
            min_curv = min_curv.min(curv);
            worst = worst.max(-curv / scale);
        }
    }
    CheckReport::new(
        format!("lsmad(L={l})"),
        n,
        worst,
        1e-6,
        format!("min sampled curvature {min_curv:.3e}"),
    )
}

/// The quadratic-form bound on the second derivative of the full data term:
/// sampled second differences of g along (H1, H2) must stay below
/// `(3 ||Z||^2 + ||A||_F) ||H1||^2 + (3 ||U||^2 + ||A||_F) ||H2||^2`.
pub fn hessian_bound_check(p: &ProblemSpec, n: usize, seed: u64) -> Result<CheckReport> {
    let a_norm = match p.data() {
        DataTerm::Full { a } => a.fro_norm(),
        _ => {
            return Err(Error::Unsupported(
                "hessian_bound_check applies to the full data term".into(),
            ))
        }
    };
    let (m, nn, k) = p.dims();
    let mut rng = SplitMix64::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let x = random_pair(m, nn, k, &mut rng, 1.0);
        let mut hdir = random_pair(m, nn, k, &mut rng, 1.0);
        let hn = hdir.fro_norm();
        if hn == 0.0 {
            continue;
        }
        hdir = hdir.scale(1.0 / hn);
        let delta = 1e-4 * (1.0 + x.fro_norm());
        let plus = x.add_scaled(delta, &hdir)?;
        let minus = x.add_scaled(-delta, &hdir)?;
        let (a, b, c) = (p.smooth_value(&plus), p.smooth_value(&x), p.smooth_value(&minus));
        let lhs = (a - 2.0 * b + c) / (delta * delta);
        let rhs = (3.0 * x.z.fro_norm_sq() + a_norm) * hdir.u.fro_norm_sq()
            + (3.0 * x.u.fro_norm_sq() + a_norm) * hdir.z.fro_norm_sq();
        let scale = 1.0 + a.abs() + b.abs() + c.abs();
        worst = worst.max((lhs - rhs) / scale);
    }
    Ok(CheckReport::new("hessian-am-gm-bound", n, worst, 1e-6, String::new()))
}

/// The regularizer catalog exercised by the prox/oracle equivalence suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegKind {
    None,
    L2,
    L1,
    Nonneg,
    NonnegL1,
    Nuclear,
    Sparsity,
    NonnegSparsity,
    GraphReg,
    Symmetric,
    MixedUL2,
}

impl RegKind {
    pub const ALL: [RegKind; 11] = [
        RegKind::None,
        RegKind::L2,
        RegKind::L1,
        RegKind::Nonneg,
        RegKind::NonnegL1,
        RegKind::Nuclear,
        RegKind::Sparsity,
        RegKind::NonnegSparsity,
        RegKind::GraphReg,
        RegKind::Symmetric,
        RegKind::MixedUL2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RegKind::None => "none",
            RegKind::L2 => "l2",
            RegKind::L1 => "l1",
            RegKind::Nonneg => "nonneg",
            RegKind::NonnegL1 => "nonneg+l1",
            RegKind::Nuclear => "nuclear",
            RegKind::Sparsity => "sparsity",
            RegKind::NonnegSparsity => "nonneg+sparsity",
            RegKind::GraphReg => "graph-reg",
            RegKind::Symmetric => "symmetric",
            RegKind::MixedUL2 => "mixed-u-l2",
        }
    }

    pub fn parse(s: &str) -> Option<RegKind> {
        RegKind::ALL.iter().copied().find(|k| k.name() == s)
    }
}

/// Random small subproblem instance for one catalog entry: sizes at most
/// 8 x 6 with K at most 5.
pub fn random_prox_instance(kind: RegKind, rng: &mut SplitMix64) -> ProxInput {
    let m = 2 + rng.index(7); // 2..=8
    let n = 2 + rng.index(5); // 2..=6
    let k = 1 + rng.index(5); // 1..=5
    let p_mat = DenseMatrix::from_raw(m, k, (0..m * k).map(|_| rng.uniform(-2.0, 2.0)).collect());
    let q_mat = DenseMatrix::from_raw(k, n, (0..k * n).map(|_| rng.uniform(-2.0, 2.0)).collect());
    let step = rng.uniform(0.1, 0.99);
    let w = rng.uniform(0.05, 0.8);
    let base_c2 = rng.uniform(0.5, 8.0);
    let (c2, aug_u, aug_z, reg_u, reg_z) = match kind {
        RegKind::None => (base_c2, 0.0, 0.0, BlockReg::none(), BlockReg::none()),
        RegKind::L2 => (base_c2, 0.0, 0.0, BlockReg::l2(w), BlockReg::l2(w)),
        RegKind::L1 => (base_c2, 0.0, 0.0, BlockReg::l1(w), BlockReg::l1(w)),
        RegKind::Nonneg => (base_c2, 0.0, 0.0, BlockReg::nonneg(), BlockReg::nonneg()),
        RegKind::NonnegL1 => {
            (base_c2, 0.0, 0.0, BlockReg::l1(w).with_nonneg(), BlockReg::l1(w).with_nonneg())
        }
        RegKind::Nuclear => (base_c2, 0.0, 0.0, BlockReg::nuclear(w), BlockReg::nuclear(w)),
        RegKind::Sparsity => {
            let s1 = 1 + rng.index(m * k);
            let s2 = 1 + rng.index(k * n);
            (base_c2, 0.0, 0.0, BlockReg::sparsity(s1), BlockReg::sparsity(s2))
        }
        RegKind::NonnegSparsity => {
            let s1 = 1 + rng.index(m * k);
            let s2 = 1 + rng.index(k * n);
            (
                base_c2,
                0.0,
                0.0,
                BlockReg::sparsity(s1).with_nonneg(),
                BlockReg::sparsity(s2).with_nonneg(),
            )
        }
        // The graph and symmetric NMF variants differ at the prox level only
        // through the enlarged c2 and their nonneg/L2 regs.
        RegKind::GraphReg => (
            base_c2 + rng.uniform(0.5, 3.0),
            0.0,
            0.0,
            BlockReg::l2(w).with_nonneg(),
            BlockReg::l2(w).with_nonneg(),
        ),
        RegKind::Symmetric => {
            (base_c2 + 2.0 * w, 0.0, 0.0, BlockReg::nonneg(), BlockReg::nonneg())
        }
        // U-only L2 in f, Z-side kernel augmentation, L1 on Z.
        RegKind::MixedUL2 => {
            (base_c2, 0.0, w, BlockReg::l2(w), BlockReg::l1(rng.uniform(0.05, 0.4)))
        }
    };
    ProxInput {
        p_mat,
        q_mat,
        kernel: KernelSpec::new(3.0, c2, aug_u, aug_z).expect("nonnegative"),
        step,
        reg_u,
        reg_z,
    }
}

/// Prox/oracle equivalence over `n` random instances of one catalog entry:
/// `|obj(bpg_prox) - obj(subproblem_oracle)| <= 1e-8 * (1 + |obj|)`.
pub fn prox_oracle_suite(kind: RegKind, n: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = SplitMix64::new(seed);
    let mut worst: f64 = 0.0;
    let mut worst_at = 0usize;
    for sample in 0..n {
        let input = random_prox_instance(kind, &mut rng);
        let closed = bpg_prox(&input)?;
        let oracle = subproblem_oracle(&input)?;
        let obj_closed = input.objective(&closed)?;
        let obj_oracle = input.objective(&oracle)?;
        let rel = (obj_closed - obj_oracle).abs() / (1.0 + obj_oracle.abs());
        if rel > worst {
            worst = rel;
            worst_at = sample;
        }
    }
    Ok(CheckReport::new(
        format!("prox-oracle[{}]", kind.name()),
        n,
        worst,
        1e-8,
        format!("worst sample {worst_at}"),
    ))
}

/// Residuals of the scalar solvers over random coefficient draws, plus the
/// parity of the rational and polynomial quintic routes.
pub fn scalar_solver_suite(n: usize, seed: u64) -> Result<(CheckReport, CheckReport)> {
    let mut rng = SplitMix64::new(seed);
    let mut worst_cubic: f64 = 0.0;
    for _ in 0..n {
        let s = rng.uniform(0.0, 100.0);
        let c1 = rng.uniform(0.0, 10.0);
        let c2 = rng.uniform(0.0, 50.0);
        if c1 * s + c2 <= 0.0 {
            continue;
        }
        let r = solve_cubic_scale(s, c1, c2)?;
        let res = (c1 * s * r * r * r + c2 * r - 1.0).abs() / (1.0 + c2);
        worst_cubic = worst_cubic.max(res);
    }
    let cubic = CheckReport::new("cubic-residual", n, worst_cubic, 1e-12, String::new());

    let mut worst_quintic: f64 = 0.0;
    let mut worst_parity: f64 = 0.0;
    for _ in 0..n {
        let c2 = rng.uniform(0.0, 20.0);
        let lam0 = rng.uniform(0.0, 5.0);
        let p = rng.uniform(0.0, 10.0);
        let q = rng.uniform(1e-3, 10.0);
        let r = solve_r1_quintic(3.0, c2, lam0, p, q)?;
        let pu = r + lam0;
        let psi = 3.0 * (p * p / (pu * pu) + q * q / (r * r)) + c2 - r;
        worst_quintic = worst_quintic.max(psi.abs() / (1.0 + r));
        let r_poly = solve_r1_quintic_poly(3.0, c2, lam0, p, q)?;
        worst_parity = worst_parity.max((r - r_poly).abs() / (1.0 + r));
    }
    let quintic = CheckReport::new(
        "quintic-residual",
        n,
        worst_quintic.max(worst_parity),
        1e-10,
        format!("route parity worst {worst_parity:.3e}"),
    );
    Ok((cubic, quintic))
}

/// One random problem per data-term variant at desk scale, for the gradient
/// and L-smad suites.
pub fn sample_problems(seed: u64) -> Result<Vec<(String, ProblemSpec)>> {
    let mut rng = SplitMix64::new(seed);
    let (m, n, k) = (5, 4, 2);
    let dense = |rng: &mut SplitMix64, r: usize, c: usize| {
        DenseMatrix::from_raw(r, c, (0..r * c).map(|_| rng.uniform(-1.0, 1.0)).collect())
    };
    let a = dense(&mut rng, m, n);
    let full = ProblemSpec::new(DataTerm::Full { a }, BlockReg::none(), BlockReg::none(), k)?;

    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.next_f64() < 0.6 {
                entries.push((i, j, rng.uniform(-1.0, 1.0)));
            }
        }
    }
    entries.push((0, 0, 1.0 + rng.next_f64()));
    let masked = ProblemSpec::new(
        DataTerm::Masked { a: crate::matrix::MaskedMatrix::from_triples(m, n, dedup(entries))? },
        BlockReg::none(),
        BlockReg::none(),
        k,
    )?;

    let a = dense(&mut rng, m, n);
    let lap = dense(&mut rng, m, m);
    let graph = ProblemSpec::new(
        DataTerm::GraphReg { a, lap, mu0: 0.7 },
        BlockReg::none(),
        BlockReg::none(),
        k,
    )?;

    let a = dense(&mut rng, m, m);
    let sym = ProblemSpec::new(
        DataTerm::SymPenalty { a, lam0: 0.4 },
        BlockReg::none(),
        BlockReg::none(),
        k,
    )?;

    Ok(vec![
        ("full".into(), full),
        ("masked".into(), masked),
        ("graph-reg".into(), graph),
        ("symmetric".into(), sym),
    ])
}

fn dedup(mut entries: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    entries.sort_by_key(|e| (e.0, e.1));
    entries.dedup_by(|a, b| (a.0, a.1) == (b.0, b.1));
    entries
}

/// Gradient checks for every data-term variant.
pub fn gradient_suites(n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (name, p) in sample_problems(seed)? {
        let mut report = grad_check(&p, n, seed ^ 0xA5A5);
        report.name = format!("gradient[{name}]");
        out.push(report);
    }
    Ok(out)
}

/// L-smad certification with L = 1 under the matched kernel for every
/// data-term variant.
pub fn lsmad_suites(n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (name, p) in sample_problems(seed)? {
        let kernel = kernel_for_problem(&p);
        let mut report = lsmad_check(&p, &kernel, 1.0, n, seed ^ 0x1234);
        report.name = format!("lsmad[{name}]");
        out.push(report);
    }
    Ok(out)
}

fn random_pair(m: usize, n: usize, k: usize, rng: &mut SplitMix64, scale: f64) -> FactorPair {
    let u = DenseMatrix::from_raw(m, k, (0..m * k).map(|_| rng.uniform(-scale, scale)).collect());
    let z = DenseMatrix::from_raw(k, n, (0..k * n).map(|_| rng.uniform(-scale, scale)).collect());
    FactorPair { u, z }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_zero_input() {
        let input = ProxInput {
            p_mat: DenseMatrix::zeros(2, 2),
            q_mat: DenseMatrix::zeros(2, 2),
            kernel: KernelSpec::new(3.0, 1.0, 0.0, 0.0).unwrap(),
            step: 0.5,
            reg_u: BlockReg::none(),
            reg_z: BlockReg::none(),
        };
        let out = subproblem_oracle(&input).unwrap();
        assert_eq!(out.fro_norm_sq(), 0.0);
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let input = ProxInput {
            p_mat: DenseMatrix::zeros(20, 10),
            q_mat: DenseMatrix::zeros(10, 20),
            kernel: KernelSpec::new(3.0, 1.0, 0.0, 0.0).unwrap(),
            step: 0.5,
            reg_u: BlockReg::none(),
            reg_z: BlockReg::none(),
        };
        assert!(matches!(subproblem_oracle(&input), Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn oracle_l1_all_below_threshold_zeroes_block() {
        // Every entry of -P sits below the scaled threshold: U block is 0.
        let input = ProxInput {
            p_mat: DenseMatrix::from_rows(&[vec![0.01, -0.02]]).unwrap(),
            q_mat: DenseMatrix::from_rows(&[vec![1.0], vec![-2.0]]).unwrap(),
            kernel: KernelSpec::new(3.0, 1.0, 0.0, 0.0).unwrap(),
            step: 0.9,
            reg_u: BlockReg::l1(0.5),
            reg_z: BlockReg::none(),
        };
        let out = subproblem_oracle(&input).unwrap();
        assert_eq!(out.u.fro_norm_sq(), 0.0);
        assert!(out.z.fro_norm_sq() > 0.0);
        let closed = bpg_prox(&input).unwrap();
        assert_eq!(closed.u.fro_norm_sq(), 0.0);
    }

    #[test]
    fn oracle_agrees_with_projected_gradient() {
        // ten convex-regularizer instances, three routes
        let kinds = [RegKind::None, RegKind::L2, RegKind::L1, RegKind::Nonneg];
        let mut rng = SplitMix64::new(99);
        let mut checked = 0;
        while checked < 10 {
            let kind = kinds[checked % kinds.len()];
            let input = random_prox_instance(kind, &mut rng);
            let oracle = subproblem_oracle(&input).unwrap();
            let pg = subproblem_projected_gradient(&input, 20000).unwrap();
            let o1 = input.objective(&oracle).unwrap();
            let o2 = input.objective(&pg).unwrap();
            assert!(
                (o1 - o2).abs() <= 1e-6 * (1.0 + o1.abs()),
                "oracle {o1} vs projected gradient {o2} on {kind:?}"
            );
            checked += 1;
        }
    }

    #[test]
    fn prox_oracle_small_suites_pass() {
        for kind in [RegKind::None, RegKind::L1, RegKind::Nuclear, RegKind::MixedUL2] {
            let report = prox_oracle_suite(kind, 20, 7).unwrap();
            assert!(report.passed, "{}", report.summary_line());
        }
    }

    #[test]
    fn scalar_solver_suite_passes() {
        let (cubic, quintic) = scalar_solver_suite(2000, 3).unwrap();
        assert!(cubic.passed, "{}", cubic.summary_line());
        assert!(quintic.passed, "{}", quintic.summary_line());
    }

    #[test]
    fn gradient_suites_pass() {
        for report in gradient_suites(30, 5).unwrap() {
            assert!(report.passed, "{}", report.summary_line());
        }
    }

    #[test]
    fn lsmad_passes_at_one_fails_at_zero() {
        let problems = sample_problems(11).unwrap();
        for (name, p) in &problems {
            let kernel = kernel_for_problem(p);
            let report = lsmad_check(p, &kernel, 1.0, 200, 13);
            assert!(report.passed, "L=1 failed for {name}: {}", report.summary_line());
        }
        // with L = 0 the upper-bound half has genuine negative curvature
        let (_, full) = &problems[0];
        let kernel = kernel_for_problem(full);
        let report = lsmad_check(full, &kernel, 0.0, 200, 17);
        assert!(!report.passed, "L=0 should expose negative curvature");
    }

    #[test]
    fn lsmad_zero_data_matrix_passes_trivially() {
        // With A = 0 the bound has no ||A||_F part; the pure quartic kernel
        // still dominates g on both sides.
        let p = ProblemSpec::new(
            DataTerm::Full { a: DenseMatrix::zeros(4, 3) },
            BlockReg::none(),
            BlockReg::none(),
            2,
        )
        .unwrap();
        let kernel = kernel_for_problem(&p);
        assert_eq!(kernel.c2(), 0.0);
        let report = lsmad_check(&p, &kernel, 1.0, 300, 41);
        assert!(report.passed, "{}", report.summary_line());
    }

    #[test]
    fn hessian_bound_passes_on_full_term() {
        let problems = sample_problems(19).unwrap();
        let report = hessian_bound_check(&problems[0].1, 100, 23).unwrap();
        assert!(report.passed, "{}", report.summary_line());
        assert!(hessian_bound_check(&problems[1].1, 10, 23).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let problems = sample_problems(31).unwrap();
        let a = grad_check(&problems[0].1, 10, 37);
        let b = grad_check(&problems[0].1, 10, 37);
        assert_eq!(a.worst_violation.to_bits(), b.worst_violation.to_bits());
    }
}
