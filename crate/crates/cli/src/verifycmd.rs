//! The `verify` subcommand: numerical check suites with a plain-text report,
//! an optional CSV summary, and a nonzero exit status on any failure.

use std::fmt::Write as _;
use std::path::Path;

use bregmf::kernel::kernel_for_problem;
use bregmf::optimize::{run_cocain_observed, CocainConfig};
use bregmf::problem::{BlockReg, DataTerm, ProblemSpec};
use bregmf::verify::{
    gradient_suites, hessian_bound_check, lsmad_suites, prox_oracle_suite, sample_problems,
    scalar_solver_suite, CheckReport, RegKind,
};
use bregmf::{data, Error, Result};

use crate::tracefile::write_atomic;

pub const SUITES: [&str; 6] =
    ["cubic", "prox-oracle", "gradients", "lsmad", "hessian-bound", "cocain-certs"];

pub fn run_suite(suite: &str, n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    if n == 0 {
        return Err(Error::InvalidInput("--n must be >= 1".into()));
    }
    match suite {
        "cubic" => {
            let (cubic, quintic) = scalar_solver_suite(n, seed)?;
            Ok(vec![cubic, quintic])
        }
        "prox-oracle" => {
            let mut out = Vec::new();
            for (i, kind) in RegKind::ALL.iter().enumerate() {
                out.push(prox_oracle_suite(*kind, n, seed.wrapping_add(i as u64))?);
            }
            Ok(out)
        }
        "gradients" => gradient_suites(n, seed),
        "lsmad" => lsmad_suites(n, seed),
        "hessian-bound" => {
            let problems = sample_problems(seed)?;
            Ok(vec![hessian_bound_check(&problems[0].1, n, seed ^ 0x77)?])
        }
        "cocain-certs" => Ok(vec![cocain_cert_check(n, seed)?]),
        other => Err(Error::InvalidInput(format!(
            "unknown suite {other:?}; expected one of {SUITES:?}"
        ))),
    }
}

/// Run CoCaIn on a small synthetic problem and re-verify the three accepted
/// inequalities, the step/estimate monotonicity, and the Lyapunov decrease
/// from the raw iterates.
fn cocain_cert_check(iters: usize, seed: u64) -> Result<CheckReport> {
    let a = data::synthetic_dense(20, 16, seed, 0.0, 1.0);
    let p = ProblemSpec::new(DataTerm::Full { a }, BlockReg::l2(0.1), BlockReg::l2(0.1), 3)?;
    let kernel = kernel_for_problem(&p);
    let cfg = CocainConfig { max_iters: iters, seed, ..CocainConfig::default() };
    let mut worst: f64 = 0.0;
    let mut lyapunov_prev = f64::INFINITY;
    let mut tau_prev = f64::INFINITY;
    let mut lbar_prev = 0.0f64;
    run_cocain_observed(&p, &cfg, None, |step| {
        let d_prev = kernel.bregman_distance(step.x_prev, step.x).expect("conformable");
        let dh_y = kernel.bregman_distance(step.x, step.y).expect("conformable");
        let dg_y = p.dg_bregman(step.x, step.y);
        let dh_next = kernel.bregman_distance(step.x_next, step.y).expect("conformable");
        let dg_next = p.dg_bregman(step.x_next, step.y);
        // inertia, lower-bound, and upper-bound inequalities
        worst = worst.max((1.0 + step.lunder * step.tau_prev) * dh_y - (cfg.delta - cfg.eps) * d_prev);
        worst = worst.max(-(dg_y + step.lunder * dh_y));
        worst = worst.max(dg_next - step.lbar * dh_next);
        // monotonicity
        worst = worst.max(step.tau - tau_prev.min(step.tau_prev));
        worst = worst.max(lbar_prev - step.lbar);
        tau_prev = step.tau;
        lbar_prev = step.lbar;
        // Lyapunov quantity
        let lyap = p.objective(step.x_next)
            + cfg.delta * kernel.bregman_distance(step.x, step.x_next).expect("conformable")
                / step.tau;
        if lyapunov_prev.is_finite() {
            worst = worst.max((lyap - lyapunov_prev) / (1.0 + lyapunov_prev.abs()) - 1e-8);
        }
        lyapunov_prev = lyap;
    })?;
    Ok(CheckReport {
        name: "cocain-certificates".into(),
        samples: iters,
        worst_violation: worst,
        tolerance: 1e-10,
        passed: worst <= 1e-10,
        details: "synthetic 20x16, K=3, L2 0.1".into(),
    })
}

/// Print one line per check and optionally write the CSV summary. Returns
/// whether every check passed.
pub fn report(reports: &[CheckReport], out: Option<&Path>) -> Result<bool> {
    let mut all_passed = true;
    for r in reports {
        println!("{}", r.summary_line());
        all_passed &= r.passed;
    }
    if let Some(path) = out {
        let mut csv = String::from("name,samples,worst_violation,tolerance,passed\n");
        for r in reports {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                r.name, r.samples, r.worst_violation, r.tolerance, r.passed
            );
        }
        write_atomic(path, &csv)?;
    }
    Ok(all_passed)
}
