//! The solver loops: BPG-MF with a constant step, BPG-MF-WB and CoCaIn
//! BPG-MF with double backtracking (the latter with adaptive inertia), and
//! the alternating PALM / iPALM baselines. Each run produces a per-iteration
//! trace.

use std::time::Instant;

use crate::data::test_rmse;
use crate::error::{Error, Result};
use crate::kernel::{kernel_for_problem, KernelSpec};
use crate::matrix::{DenseMatrix, FactorPair, MaskedMatrix};
use crate::problem::{DataTerm, ProblemSpec};
use crate::prox::{bpg_prox, euclid_prox, solve_cubic_scale, ProxInput};
use crate::rng::SplitMix64;

/// Accept a backtracking certificate when its slack is above this (negative)
/// floor. Tight enough that the post-hoc recheck budget of -1e-10 always
/// holds, loose enough that cancellation noise near a fixed point cannot
/// stall the search.
const CERT_SLACK: f64 = 5e-11;

/// Lipschitz floor for the alternating baselines when a block vanishes.
const PALM_L_FLOOR: f64 = 1e-12;

/// Start-vector seed for the power iteration.
const POWER_SEED: u64 = 0x5EED_17E4;

#[derive(Debug, Clone)]
pub struct BpgConfig {
    /// Step parameter; the kernel is built so g is L-smad with L = 1, hence
    /// the open interval (0, 1).
    pub lam: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Uniform initialization range for both factors.
    pub init_range: (f64, f64),
    /// Optional early exit when `||x_{k+1} - x_k||_F / step` falls below the
    /// tolerance. Off by default: the experiments run a fixed budget.
    pub tol: Option<f64>,
}

impl Default for BpgConfig {
    fn default() -> Self {
        BpgConfig { lam: 0.99, max_iters: 1000, seed: 1, init_range: (0.0, 0.1), tol: None }
    }
}

impl BpgConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lam > 0.0 && self.lam < 1.0) {
            return Err(Error::InvalidInput("BPG step lam must lie in (0, 1)".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("iteration budget must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CocainConfig {
    pub delta: f64,
    pub eps: f64,
    /// Initial upper estimate; tau_0 = 1 / lbar0.
    pub lbar0: f64,
    /// Backtracking scale nu > 1.
    pub nu: f64,
    /// Floor for the per-iteration upper-estimate initialization.
    pub lbar_min: f64,
    /// Multiplicative shrink applied to the inertia candidate until the
    /// inertia inequality holds.
    pub gamma_shrink: f64,
    /// Cap on upper-bound doublings per iteration.
    pub max_backtracks: u32,
    pub max_iters: usize,
    pub seed: u64,
    pub init_range: (f64, f64),
    pub tol: Option<f64>,
}

impl Default for CocainConfig {
    fn default() -> Self {
        CocainConfig {
            delta: 0.99,
            eps: 1e-4,
            lbar0: 1e-2,
            nu: 2.0,
            lbar_min: 1e-2,
            gamma_shrink: 0.5,
            max_backtracks: 60,
            max_iters: 1000,
            seed: 1,
            init_range: (0.0, 0.1),
            tol: None,
        }
    }
}

impl CocainConfig {
    fn validate(&self, alpha: f64, sigma: f64) -> Result<()> {
        if !(self.delta < 1.0 && self.eps < self.delta && self.eps > 0.0) {
            return Err(Error::InvalidInput("need 1 > delta > eps > 0".into()));
        }
        if !self.nu.is_finite() || self.nu <= 1.0 {
            return Err(Error::InvalidInput("backtracking scale nu must exceed 1".into()));
        }
        if !(self.gamma_shrink > 0.0 && self.gamma_shrink < 1.0) {
            return Err(Error::InvalidInput("gamma_shrink must lie in (0, 1)".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("iteration budget must be >= 1".into()));
        }
        let floor = -alpha / ((1.0 - self.delta) * sigma);
        if !(self.lbar0 > floor && self.lbar0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lbar0 must be positive and exceed -alpha/((1-delta) sigma) = {floor}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PalmConfig {
    /// Per-block extrapolation; 0 recovers PALM.
    pub beta: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub init_range: (f64, f64),
    pub tol: Option<f64>,
}

impl Default for PalmConfig {
    fn default() -> Self {
        PalmConfig { beta: 0.0, max_iters: 1000, seed: 1, init_range: (0.0, 0.1), tol: None }
    }
}

/// One trace row. `step`, `lbar`, `lunder`, `test_rmse` are None where the
/// column does not apply to the method.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub elapsed_sec: f64,
    pub objective: f64,
    pub step: Option<f64>,
    pub inertia: f64,
    pub lbar: Option<f64>,
    pub lunder: Option<f64>,
    pub test_rmse: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }
}

/// Per-iteration snapshot handed to observers; every inequality the method
/// certified can be recomputed independently from these iterates.
pub struct CocainStep<'a> {
    pub iter: usize,
    pub x_prev: &'a FactorPair,
    pub x: &'a FactorPair,
    pub y: &'a FactorPair,
    pub x_next: &'a FactorPair,
    pub gamma: f64,
    pub tau_prev: f64,
    pub tau: f64,
    pub lbar: f64,
    pub lunder: f64,
}

/// Deterministic uniform initialization shared by every solver: given the
/// same dims, seed, and range, all methods start from the same factors.
pub fn init_factors(dims: (usize, usize, usize), seed: u64, range: (f64, f64)) -> FactorPair {
    let (m, n, k) = dims;
    let mut rng = SplitMix64::new(seed);
    let u =
        DenseMatrix::from_raw(m, k, (0..m * k).map(|_| rng.uniform(range.0, range.1)).collect());
    let z =
        DenseMatrix::from_raw(k, n, (0..k * n).map(|_| rng.uniform(range.0, range.1)).collect());
    FactorPair { u, z }
}

/// One BPG-MF step: `P = lam * grad_U g(x) - grad_U h(x)` (same for Q), then
/// the prox map with step `lam`.
pub fn bpg_step(
    p: &ProblemSpec,
    kernel: &KernelSpec,
    lam: f64,
    x: &FactorPair,
) -> Result<FactorPair> {
    let g = p.smooth_grad(x);
    let h = kernel.grad(x);
    let input = ProxInput {
        p_mat: g.u.scale(lam).sub(&h.u)?,
        q_mat: g.z.scale(lam).sub(&h.z)?,
        kernel: *kernel,
        step: lam,
        reg_u: *p.reg_u(),
        reg_z: *p.reg_z(),
    };
    bpg_prox(&input)
}

/// The boxed single-equation path for the unregularized full problem:
/// intermediary gradient-descent steps with step `lam / t_k`, then a shared
/// rescaling from one cubic. Produces the same iterate as [`bpg_step`] under
/// the matched kernel; kept as a fused fast path and cross-check.
pub fn bpg_step_direct(a: &DenseMatrix, lam: f64, x: &FactorPair) -> Result<FactorPair> {
    let t_k = 3.0 * x.fro_norm_sq() + a.fro_norm();
    let r = a.sub(&x.product())?;
    let gu = r.gemm_nt(&x.z)?.scale(-1.0);
    let gz = x.u.gemm_tn(&r)?.scale(-1.0);
    let p = x.u.add_scaled(-lam / t_k, &gu)?;
    let q = x.z.add_scaled(-lam / t_k, &gz)?;
    let s = t_k * t_k * (p.fro_norm_sq() + q.fro_norm_sq());
    if s == 0.0 {
        return Ok(FactorPair::zeros(x.u.rows(), x.z.cols(), x.inner_dim()));
    }
    let r_scale = solve_cubic_scale(s, 3.0, a.fro_norm())?;
    Ok(FactorPair { u: p.scale(r_scale * t_k), z: q.scale(r_scale * t_k) })
}

pub fn run_bpg(p: &ProblemSpec, cfg: &BpgConfig) -> Result<Trace> {
    run_bpg_traced(p, cfg, None)
}

/// BPG-MF with a constant step. When a test set is supplied the trace
/// carries the held-out RMSE of each iterate.
pub fn run_bpg_traced(
    p: &ProblemSpec,
    cfg: &BpgConfig,
    test: Option<&MaskedMatrix>,
) -> Result<Trace> {
    cfg.validate()?;
    let kernel = kernel_for_problem(p);
    if kernel.strong_convexity() <= 0.0 {
        eprintln!(
            "warning: kernel has zero strong convexity (c2 = 0); \
             BPG proceeds but the inertial variants would refuse this problem"
        );
    }
    let mut x = init_factors(p.dims(), cfg.seed, cfg.init_range);
    let mut trace = Trace::default();
    let start = Instant::now();
    for iter in 1..=cfg.max_iters {
        let next = bpg_step(p, &kernel, cfg.lam, &x)?;
        let moved = next.sub(&x)?.fro_norm();
        x = next;
        trace.records.push(TraceRecord {
            iter,
            elapsed_sec: start.elapsed().as_secs_f64(),
            objective: p.objective(&x),
            step: Some(cfg.lam),
            inertia: 0.0,
            lbar: None,
            lunder: None,
            test_rmse: test.map(|t| test_rmse(&x, t)).transpose()?,
        });
        if let Some(tol) = cfg.tol {
            if moved / cfg.lam <= tol {
                break;
            }
        }
    }
    Ok(trace)
}

pub fn run_cocain(p: &ProblemSpec, cfg: &CocainConfig) -> Result<Trace> {
    cocain_engine(p, cfg, None, false, |_| {})
}

pub fn run_cocain_traced(
    p: &ProblemSpec,
    cfg: &CocainConfig,
    test: Option<&MaskedMatrix>,
) -> Result<Trace> {
    cocain_engine(p, cfg, test, false, |_| {})
}

/// CoCaIn with a per-iteration observer; the observer sees every accepted
/// step with the iterates needed to re-verify the certificates.
pub fn run_cocain_observed<F>(
    p: &ProblemSpec,
    cfg: &CocainConfig,
    test: Option<&MaskedMatrix>,
    observer: F,
) -> Result<Trace>
where
    F: FnMut(&CocainStep),
{
    cocain_engine(p, cfg, test, false, observer)
}

pub fn run_bpg_wb(p: &ProblemSpec, cfg: &CocainConfig) -> Result<Trace> {
    cocain_engine(p, cfg, None, true, |_| {})
}

/// BPG-MF-WB: CoCaIn with the inertia pinned to zero (backtracking only).
pub fn run_bpg_wb_traced(
    p: &ProblemSpec,
    cfg: &CocainConfig,
    test: Option<&MaskedMatrix>,
) -> Result<Trace> {
    cocain_engine(p, cfg, test, true, |_| {})
}

fn cocain_engine<F>(
    p: &ProblemSpec,
    cfg: &CocainConfig,
    test: Option<&MaskedMatrix>,
    pin_gamma_zero: bool,
    mut observer: F,
) -> Result<Trace>
where
    F: FnMut(&CocainStep),
{
    let kernel = kernel_for_problem(p);
    let sigma = kernel.strong_convexity();
    if sigma <= 0.0 {
        return Err(Error::StrongConvexityRequired);
    }
    let alpha = p.semi_convexity().ok_or(Error::SemiConvexityUnavailable)?;
    cfg.validate(alpha, sigma)?;

    let mut x_prev = init_factors(p.dims(), cfg.seed, cfg.init_range);
    let mut x = x_prev.clone();
    let mut tau_prev = 1.0 / cfg.lbar0;
    let mut lbar_prev = cfg.lbar0;
    let mut lunder_prev = 0.0f64;
    let mut trace = Trace::default();
    let start = Instant::now();

    for iter in 1..=cfg.max_iters {
        let d_prev = kernel.bregman_distance(&x_prev, &x)?;
        let diff = x.sub(&x_prev)?;
        let mut gamma_seed = if pin_gamma_zero || d_prev <= 0.0 {
            0.0
        } else {
            ((cfg.delta - cfg.eps) / (1.0 + tau_prev * lunder_prev)).sqrt()
        };
        let mut lbar = lbar_prev.max(cfg.lbar_min);
        let mut backtracks = 0u32;
        let mut rounds = 0u32;
        let (gamma, y, lunder, tau, x_next) = loop {
            rounds += 1;
            if rounds > cfg.max_backtracks + 60 {
                return Err(Error::BacktrackingExceeded { cap: cfg.max_backtracks });
            }
            // Inertia search: seed gamma with the Euclidean closed-form
            // bound at the previous lower estimate, shrink until the inertia
            // inequality holds with the lower estimate recomputed at the
            // candidate point. gamma = 0 is always admissible: both sides of
            // the inequality collapse to 0.
            let mut gamma = gamma_seed;
            let (gamma, y, lunder, dh_y) = loop {
                if gamma == 0.0 {
                    break (0.0, x.clone(), 0.0, 0.0);
                }
                let y = x.add_scaled(gamma, &diff)?;
                let dh = kernel.bregman_distance(&x, &y)?;
                let dg = p.dg_bregman(&x, &y);
                let lunder = if dh > 0.0 { (-dg / dh).max(0.0) } else { 0.0 };
                if (cfg.delta - cfg.eps) * d_prev + CERT_SLACK >= (1.0 + lunder * tau_prev) * dh {
                    break (gamma, y, lunder, dh);
                }
                gamma *= cfg.gamma_shrink;
                if gamma < 1e-12 {
                    gamma = 0.0;
                }
            };

            // Upper backtracking: monotone lbar, tau capped by its inverse.
            let g_y = p.smooth_value(&y);
            let grad_y = p.smooth_grad(&y);
            let grad_h_y = kernel.grad(&y);
            let (tau, cand) = loop {
                let tau = tau_prev.min(1.0 / lbar);
                let input = ProxInput {
                    p_mat: grad_y.u.scale(tau).sub(&grad_h_y.u)?,
                    q_mat: grad_y.z.scale(tau).sub(&grad_h_y.z)?,
                    kernel,
                    step: tau,
                    reg_u: *p.reg_u(),
                    reg_z: *p.reg_z(),
                };
                let cand = bpg_prox(&input)?;
                let dh = kernel.bregman_distance(&cand, &y)?;
                let dg = p.dg_bregman_cached(&cand, &y, g_y, &grad_y);
                if dg <= lbar * dh + CERT_SLACK {
                    break (tau, cand);
                }
                lbar *= cfg.nu;
                backtracks += 1;
                if backtracks > cfg.max_backtracks {
                    return Err(Error::BacktrackingExceeded { cap: cfg.max_backtracks });
                }
            };

            // The inertia inequality was certified at the previous step
            // size. When backtracking shrank the step this iteration, the
            // Lyapunov descent needs the step-consistent form (identical to
            // the printed one when tau is unchanged); shrink the inertia and
            // redo the step until both hold.
            if gamma == 0.0
                || (cfg.delta - cfg.eps) * d_prev + CERT_SLACK
                    >= tau_prev * (1.0 / tau + lunder) * dh_y
            {
                break (gamma, y, lunder, tau, cand);
            }
            gamma_seed = gamma * cfg.gamma_shrink;
            if gamma_seed < 1e-12 {
                gamma_seed = 0.0;
            }
        };

        observer(&CocainStep {
            iter,
            x_prev: &x_prev,
            x: &x,
            y: &y,
            x_next: &x_next,
            gamma,
            tau_prev,
            tau,
            lbar,
            lunder,
        });
        trace.records.push(TraceRecord {
            iter,
            elapsed_sec: start.elapsed().as_secs_f64(),
            objective: p.objective(&x_next),
            step: Some(tau),
            inertia: gamma,
            lbar: Some(lbar),
            lunder: Some(lunder),
            test_rmse: test.map(|t| test_rmse(&x_next, t)).transpose()?,
        });

        let moved = x_next.sub(&x)?.fro_norm();
        x_prev = x;
        x = x_next;
        tau_prev = tau;
        lbar_prev = lbar;
        lunder_prev = lunder;
        if let Some(tol) = cfg.tol {
            if moved / tau <= tol {
                break;
            }
        }
    }
    Ok(trace)
}

pub fn run_palm(p: &ProblemSpec, cfg: &PalmConfig) -> Result<Trace> {
    run_palm_traced(p, cfg, None)
}

/// PALM (beta = 0) / iPALM (beta > 0): alternating proximal-gradient sweeps
/// with per-block Lipschitz steps.
pub fn run_palm_traced(
    p: &ProblemSpec,
    cfg: &PalmConfig,
    test: Option<&MaskedMatrix>,
) -> Result<Trace> {
    if cfg.max_iters == 0 {
        return Err(Error::InvalidInput("iteration budget must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&cfg.beta) {
        return Err(Error::InvalidInput("iPALM extrapolation beta must lie in [0, 1)".into()));
    }
    let mut x_prev = init_factors(p.dims(), cfg.seed, cfg.init_range);
    let mut x = x_prev.clone();
    let mut trace = Trace::default();
    let start = Instant::now();
    for iter in 1..=cfg.max_iters {
        let next = palm_sweep(p, &x, &x_prev, cfg.beta)?;
        let moved = next.sub(&x)?.fro_norm();
        x_prev = x;
        x = next;
        trace.records.push(TraceRecord {
            iter,
            elapsed_sec: start.elapsed().as_secs_f64(),
            objective: p.objective(&x),
            step: None,
            inertia: cfg.beta,
            lbar: None,
            lunder: None,
            test_rmse: test.map(|t| test_rmse(&x, t)).transpose()?,
        });
        if let Some(tol) = cfg.tol {
            if moved <= tol {
                break;
            }
        }
    }
    Ok(trace)
}

/// One alternating sweep: U-block proximal-gradient step with step 1/L_U,
/// then the Z block at the updated U. With beta > 0 each block is
/// extrapolated before its own step.
pub fn palm_sweep(
    p: &ProblemSpec,
    x: &FactorPair,
    x_prev: &FactorPair,
    beta: f64,
) -> Result<FactorPair> {
    // U block
    let u_y = if beta > 0.0 {
        x.u.add_scaled(beta, &x.u.sub(&x_prev.u)?)?
    } else {
        x.u.clone()
    };
    let l_u = block_lipschitz_u(p, &x.z)?.max(PALM_L_FLOOR);
    let at_uy = FactorPair { u: u_y.clone(), z: x.z.clone() };
    let grad_u = p.smooth_grad(&at_uy).u;
    let u_new = euclid_prox(&u_y.add_scaled(-1.0 / l_u, &grad_u)?, p.reg_u(), 1.0 / l_u)?;

    // Z block at the updated U
    let z_y = if beta > 0.0 {
        x.z.add_scaled(beta, &x.z.sub(&x_prev.z)?)?
    } else {
        x.z.clone()
    };
    let l_z = block_lipschitz_z(p, &u_new)?.max(PALM_L_FLOOR);
    let at_zy = FactorPair { u: u_new.clone(), z: z_y.clone() };
    let grad_z = p.smooth_grad(&at_zy).z;
    let z_new = euclid_prox(&z_y.add_scaled(-1.0 / l_z, &grad_z)?, p.reg_z(), 1.0 / l_z)?;

    Ok(FactorPair { u: u_new, z: z_new })
}

fn block_lipschitz_u(p: &ProblemSpec, z: &DenseMatrix) -> Result<f64> {
    let base = spectral_norm(&z.gemm_nt(z)?).value;
    Ok(match p.data() {
        DataTerm::GraphReg { lap, mu0, .. } => {
            let sym = lap.add(&lap.transpose())?.scale(0.5);
            base + mu0 * spectral_norm(&sym).value
        }
        DataTerm::SymPenalty { lam0, .. } => base + lam0,
        _ => base,
    })
}

fn block_lipschitz_z(p: &ProblemSpec, u: &DenseMatrix) -> Result<f64> {
    let base = spectral_norm(&u.gemm_tn(u)?).value;
    Ok(match p.data() {
        DataTerm::SymPenalty { lam0, .. } => base + lam0,
        _ => base,
    })
}

/// Spectral norm estimate from power iteration.
#[derive(Debug, Clone, Copy)]
pub struct SpectralNorm {
    pub value: f64,
    /// False when the iteration cap was hit; the value is then the best
    /// estimate so far.
    pub converged: bool,
}

/// Largest singular value via power iteration on the smaller Gram matrix,
/// relative tolerance 1e-8, iteration cap 1000. Deterministic start vector.
pub fn spectral_norm(m: &DenseMatrix) -> SpectralNorm {
    let gram = if m.rows() <= m.cols() {
        m.gemm_nt(m).expect("shapes agree")
    } else {
        m.gemm_tn(m).expect("shapes agree")
    };
    let n = gram.rows();
    if n == 0 {
        return SpectralNorm { value: 0.0, converged: true };
    }
    let mut rng = SplitMix64::new(POWER_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(0.5, 1.5)).collect();
    normalize(&mut v);
    let mut lambda = 0.0f64;
    let gd = gram.data();
    for it in 0..1000 {
        let mut w = vec![0.0; n];
        for (i, wi) in w.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (g, vj) in gd[i * n..(i + 1) * n].iter().zip(&v) {
                acc += g * vj;
            }
            *wi = acc;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return SpectralNorm { value: 0.0, converged: true };
        }
        for x in &mut w {
            *x /= norm;
        }
        v = w;
        if it > 0 && (norm - lambda).abs() <= 1e-8 * norm.max(f64::MIN_POSITIVE) {
            return SpectralNorm { value: norm.sqrt(), converged: true };
        }
        lambda = norm;
    }
    SpectralNorm { value: lambda.sqrt(), converged: false }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}
