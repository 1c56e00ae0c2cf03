//! Benchmark and verification harness for the matrix-factorization solvers:
//! single runs with CSV traces, multi-seed statistical evaluation, numerical
//! verification suites, and SVG convergence plots.

mod config;
mod plot;
mod runner;
mod tracefile;
mod verifycmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bregmf::{Error, Result};
use config::{pick, pick_opt, ConfigMap};
use plot::{NamedTrace, XAxis, YAxis};
use runner::{Algo, RunSettings};
use tracefile::{trace_from_csv, write_atomic};

#[derive(Parser)]
#[command(name = "bregmf", version, about = "Bregman proximal gradient matrix factorization")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one solver and write a per-iteration CSV trace.
    Run(RunCmd),
    /// Run the full algorithm grid over many seeds with shared per-seed
    /// initialization; writes per-seed finals and a quantile summary.
    Stats(StatsCmd),
    /// Numerical verification suites; exits nonzero on any failed check.
    Verify(VerifyCmd),
    /// Render trace CSVs as an SVG line chart.
    Plot(PlotCmd),
}

/// Problem and optimizer knobs shared by `run` and `stats`. Every value can
/// also come from a `key=value` config file; explicit flags win.
#[derive(Args, Debug, Default)]
struct CommonOpts {
    /// Data selector: synthetic:MxN, csv:PATH, triples:PATH, ml100k:PATH,
    /// ml1m:PATH, or ml10m:PATH
    #[arg(long)]
    data: Option<String>,
    /// Seed for the synthetic data generator (independent of --seed)
    #[arg(long)]
    data_seed: Option<u64>,
    /// Synthetic entries are uniform in [data-lo, data-hi)
    #[arg(long)]
    data_lo: Option<f64>,
    #[arg(long)]
    data_hi: Option<f64>,
    /// Inner dimension K of the factorization
    #[arg(long)]
    k: Option<usize>,
    /// Regularization: none, l2, l1, nuclear, or sparsity
    #[arg(long)]
    reg: Option<String>,
    /// Regularization weight (lambda_0)
    #[arg(long)]
    lam0: Option<f64>,
    /// Constrain both factors to be elementwise nonnegative
    #[arg(long)]
    nonneg: bool,
    /// Sparsity targets per block (with --reg sparsity)
    #[arg(long)]
    s1: Option<usize>,
    #[arg(long)]
    s2: Option<usize>,
    /// Graph Laplacian CSV; adds the graph penalty with weight --mu0
    #[arg(long)]
    laplacian: Option<PathBuf>,
    #[arg(long)]
    mu0: Option<f64>,
    /// Symmetry penalty weight; requires a square data matrix
    #[arg(long)]
    sym_lam0: Option<f64>,
    /// Train fraction for rating data (the rest becomes the test set)
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// Iteration budget
    #[arg(long)]
    iters: Option<usize>,
    /// Initialization seed (shared across algorithms for a fair comparison)
    #[arg(long)]
    seed: Option<u64>,
    /// Factors start uniform in [init-lo, init-hi)
    #[arg(long)]
    init_lo: Option<f64>,
    #[arg(long)]
    init_hi: Option<f64>,
    /// BPG step parameter in (0, 1)
    #[arg(long)]
    lam: Option<f64>,
    /// iPALM extrapolation
    #[arg(long)]
    beta: Option<f64>,
    /// CoCaIn delta and epsilon (1 > delta > epsilon > 0)
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Backtracking scale (> 1)
    #[arg(long)]
    nu: Option<f64>,
    /// Initial upper estimate; tau_0 = 1/lbar0
    #[arg(long)]
    lbar0: Option<f64>,
    #[arg(long)]
    lbar_min: Option<f64>,
    #[arg(long)]
    gamma_shrink: Option<f64>,
    /// Optional early exit on the gradient-mapping norm
    #[arg(long)]
    tol: Option<f64>,
    /// Record wall-clock times in the trace (not byte-reproducible)
    #[arg(long)]
    timing: bool,
    /// key=value file supplying any of the above (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonOpts {
    fn resolve(&self) -> Result<RunSettings> {
        let cfg = match &self.config {
            Some(path) => ConfigMap::load(path)?,
            None => ConfigMap::default(),
        };
        let settings = RunSettings {
            data: pick(
                self.data.clone(),
                cfg.get_string("data"),
                "synthetic:200x200".to_string(),
            ),
            data_seed: pick(self.data_seed, cfg.get_u64("data-seed")?, 0),
            data_lo: pick(self.data_lo, cfg.get_f64("data-lo")?, 0.0),
            data_hi: pick(self.data_hi, cfg.get_f64("data-hi")?, 1.0),
            k: pick(self.k, cfg.get_usize("k")?, 5),
            reg: pick(self.reg.clone(), cfg.get_string("reg"), "none".to_string()),
            lam0: pick(self.lam0, cfg.get_f64("lam0")?, 0.1),
            nonneg: self.nonneg || cfg.get_bool("nonneg")?.unwrap_or(false),
            s1: pick_opt(self.s1, cfg.get_usize("s1")?),
            s2: pick_opt(self.s2, cfg.get_usize("s2")?),
            laplacian: pick_opt(
                self.laplacian.clone(),
                cfg.get_string("laplacian").map(PathBuf::from),
            ),
            mu0: pick(self.mu0, cfg.get_f64("mu0")?, 1.0),
            sym_lam0: pick_opt(self.sym_lam0, cfg.get_f64("sym-lam0")?),
            split: pick(self.split, cfg.get_f64("split")?, 0.8),
            split_seed: pick(self.split_seed, cfg.get_u64("split-seed")?, 0),
            iters: pick(self.iters, cfg.get_usize("iters")?, 1000),
            seed: pick(self.seed, cfg.get_u64("seed")?, 1),
            init_lo: pick(self.init_lo, cfg.get_f64("init-lo")?, 0.0),
            init_hi: pick(self.init_hi, cfg.get_f64("init-hi")?, 0.1),
            lam: pick(self.lam, cfg.get_f64("lam")?, 0.99),
            beta: pick(self.beta, cfg.get_f64("beta")?, 0.2),
            delta: pick(self.delta, cfg.get_f64("delta")?, 0.99),
            epsilon: pick(self.epsilon, cfg.get_f64("epsilon")?, 1e-4),
            nu: pick(self.nu, cfg.get_f64("nu")?, 2.0),
            lbar0: pick(self.lbar0, cfg.get_f64("lbar0")?, 1e-2),
            lbar_min: pick(self.lbar_min, cfg.get_f64("lbar-min")?, 1e-2),
            gamma_shrink: pick(self.gamma_shrink, cfg.get_f64("gamma-shrink")?, 0.5),
            tol: pick_opt(self.tol, cfg.get_f64("tol")?),
            timing: self.timing || cfg.get_bool("timing")?.unwrap_or(false),
        };
        Ok(settings)
    }
}

#[derive(Args)]
struct RunCmd {
    /// Solver: bpg, bpg-wb, cocain, palm, or ipalm
    #[arg(long)]
    algo: Option<String>,
    #[command(flatten)]
    common: CommonOpts,
    /// Output trace CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsCmd {
    /// Number of random seeds
    #[arg(long)]
    seeds: Option<usize>,
    #[command(flatten)]
    common: CommonOpts,
    /// Output CSV path (a `-summary.csv` sibling is written too)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyCmd {
    /// Suite: cubic, prox-oracle, gradients, lsmad, hessian-bound, or
    /// cocain-certs
    #[arg(long)]
    suite: String,
    /// Samples per check
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Optional CSV report path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotCmd {
    /// Trace CSV files (at least one)
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// X axis: iter or time
    #[arg(long, default_value = "iter")]
    x: String,
    /// Y axis: objective, gap, or test-rmse
    #[arg(long, default_value = "objective")]
    y: String,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Run(cmd) => {
            let settings = cmd.common.resolve()?;
            let algo_name = cmd
                .algo
                .or_else(|| {
                    cmd.common
                        .config
                        .as_ref()
                        .and_then(|p| ConfigMap::load(p).ok())
                        .and_then(|c| c.get_string("algo"))
                })
                .ok_or_else(|| Error::InvalidInput("--algo is required".into()))?;
            let algo = Algo::parse(&algo_name)?;
            let out = cmd
                .out
                .unwrap_or_else(|| PathBuf::from(format!("{}-trace.csv", algo.name())));
            runner::cmd_run(algo, &settings, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Stats(cmd) => {
            let settings = cmd.common.resolve()?;
            let seeds = cmd.seeds.unwrap_or(50);
            let out = cmd.out.unwrap_or_else(|| PathBuf::from("stats.csv"));
            runner::cmd_stats(&settings, seeds, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify(cmd) => {
            let reports = verifycmd::run_suite(&cmd.suite, cmd.n, cmd.seed)?;
            let all_passed = verifycmd::report(&reports, cmd.out.as_deref())?;
            Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Plot(cmd) => {
            let x = match cmd.x.as_str() {
                "iter" => XAxis::Iter,
                "time" => XAxis::Time,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown x axis {other:?}; expected iter or time"
                    )))
                }
            };
            let y = match cmd.y.as_str() {
                "objective" => YAxis::Objective,
                "gap" => YAxis::Gap,
                "test-rmse" => YAxis::TestRmse,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown y axis {other:?}; expected objective, gap, or test-rmse"
                    )))
                }
            };
            let mut traces = Vec::new();
            for path in &cmd.traces {
                let text = std::fs::read_to_string(path)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                traces.push(NamedTrace { name, trace: trace_from_csv(&text)? });
            }
            let svg = plot::render_traces(&traces, x, y)?;
            write_atomic(&cmd.out, &svg)?;
            println!("plot: {} traces -> {}", traces.len(), cmd.out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
