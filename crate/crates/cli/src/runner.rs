//! Problem construction from CLI selectors and the run/stats drivers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bregmf::data::{
    load_movielens, split_train_test, synthetic_dense, MovieLensData, MovieLensFormat,
};
use bregmf::matrix::{DenseMatrix, MaskedMatrix};
use bregmf::optimize::{
    run_bpg_traced, run_bpg_wb_traced, run_cocain_traced, run_palm_traced, BpgConfig,
    CocainConfig, PalmConfig, Trace,
};
use bregmf::problem::{BlockReg, DataTerm, ProblemSpec};
use bregmf::{Error, Result};

use crate::tracefile::{trace_to_csv, write_atomic};

/// Everything a run needs after flag/config/default resolution.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub data: String,
    pub data_seed: u64,
    pub data_lo: f64,
    pub data_hi: f64,
    pub k: usize,
    pub reg: String,
    pub lam0: f64,
    pub nonneg: bool,
    pub s1: Option<usize>,
    pub s2: Option<usize>,
    pub laplacian: Option<PathBuf>,
    pub mu0: f64,
    pub sym_lam0: Option<f64>,
    pub split: f64,
    pub split_seed: u64,
    pub iters: usize,
    pub seed: u64,
    pub init_lo: f64,
    pub init_hi: f64,
    pub lam: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub lbar0: f64,
    pub lbar_min: f64,
    pub gamma_shrink: f64,
    pub tol: Option<f64>,
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Bpg,
    BpgWb,
    Cocain,
    Palm,
    Ipalm,
}

impl Algo {
    pub fn parse(s: &str) -> Result<Algo> {
        Ok(match s {
            "bpg" => Algo::Bpg,
            "bpg-wb" => Algo::BpgWb,
            "cocain" => Algo::Cocain,
            "palm" => Algo::Palm,
            "ipalm" => Algo::Ipalm,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown algorithm {other:?}; expected bpg, bpg-wb, cocain, palm, or ipalm"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algo::Bpg => "bpg",
            Algo::BpgWb => "bpg-wb",
            Algo::Cocain => "cocain",
            Algo::Palm => "palm",
            Algo::Ipalm => "ipalm",
        }
    }
}

/// A built problem plus whatever came with the data source: a held-out test
/// set for rating data and the id remapping to persist next to outputs.
pub struct BuiltProblem {
    pub problem: ProblemSpec,
    pub test: Option<MaskedMatrix>,
    pub id_map: Option<MovieLensData>,
}

pub fn build_problem(s: &RunSettings) -> Result<BuiltProblem> {
    let (selector, rest) = s.data.split_once(':').ok_or_else(|| {
        Error::InvalidInput(format!(
            "data selector {:?} must look like synthetic:MxN, csv:PATH, triples:PATH, \
             ml100k:PATH, ml1m:PATH, or ml10m:PATH",
            s.data
        ))
    })?;
    let reg_pair = block_regs(s)?;
    let mut test = None;
    let mut id_map = None;

    let data_term = match selector {
        "synthetic" => {
            let (m, n) = rest.split_once('x').ok_or_else(|| {
                Error::InvalidInput(format!("synthetic selector {rest:?} must be MxN"))
            })?;
            let m: usize = m
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad synthetic rows {m:?}")))?;
            let n: usize = n
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad synthetic cols {n:?}")))?;
            dense_term(s, synthetic_dense(m, n, s.data_seed, s.data_lo, s.data_hi))?
        }
        "csv" => dense_term(s, DenseMatrix::read_csv(existing(rest)?)?)?,
        "triples" => {
            let full = MaskedMatrix::read_triples(existing(rest)?)?;
            let ds = split_train_test(&full, s.split, s.split_seed)?;
            test = Some(ds.test);
            DataTerm::Masked { a: ds.train }
        }
        "ml100k" | "ml1m" | "ml10m" => {
            let fmt = match selector {
                "ml100k" => MovieLensFormat::Ml100k,
                "ml1m" => MovieLensFormat::Ml1m,
                _ => MovieLensFormat::Ml10m,
            };
            let loaded = load_movielens(existing(rest)?, fmt)?;
            let ds = split_train_test(&loaded.matrix, s.split, s.split_seed)?;
            test = Some(ds.test);
            let term = DataTerm::Masked { a: ds.train };
            id_map = Some(loaded);
            term
        }
        other => {
            return Err(Error::InvalidInput(format!("unknown data selector {other:?}")));
        }
    };

    let problem = ProblemSpec::new(data_term, reg_pair.0, reg_pair.1, s.k)?;
    Ok(BuiltProblem { problem, test, id_map })
}

fn existing(path: &str) -> Result<&Path> {
    let p = Path::new(path);
    if !p.exists() {
        return Err(Error::InvalidInput(format!("file {path:?} does not exist")));
    }
    Ok(p)
}

/// Dense sources can additionally carry the graph or symmetry penalty.
fn dense_term(s: &RunSettings, a: DenseMatrix) -> Result<DataTerm> {
    if let Some(lap_path) = &s.laplacian {
        if s.sym_lam0.is_some() {
            return Err(Error::InvalidInput(
                "choose at most one of --laplacian and --sym-lam0".into(),
            ));
        }
        let lap = DenseMatrix::read_csv(existing(&lap_path.to_string_lossy())?)?;
        return Ok(DataTerm::GraphReg { a, lap, mu0: s.mu0 });
    }
    if let Some(lam0) = s.sym_lam0 {
        return Ok(DataTerm::SymPenalty { a, lam0 });
    }
    Ok(DataTerm::Full { a })
}

fn block_regs(s: &RunSettings) -> Result<(BlockReg, BlockReg)> {
    let base = match s.reg.as_str() {
        "none" => (BlockReg::none(), BlockReg::none()),
        "l2" => (BlockReg::l2(s.lam0), BlockReg::l2(s.lam0)),
        "l1" => (BlockReg::l1(s.lam0), BlockReg::l1(s.lam0)),
        "nuclear" => (BlockReg::nuclear(s.lam0), BlockReg::nuclear(s.lam0)),
        "sparsity" => {
            let s1 = s.s1.ok_or_else(|| {
                Error::InvalidInput("--reg sparsity requires --s1 and --s2".into())
            })?;
            let s2 = s.s2.ok_or_else(|| {
                Error::InvalidInput("--reg sparsity requires --s1 and --s2".into())
            })?;
            (BlockReg::sparsity(s1), BlockReg::sparsity(s2))
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown regularization {other:?}; expected none, l2, l1, nuclear, or sparsity"
            )))
        }
    };
    if s.nonneg {
        Ok((base.0.with_nonneg(), base.1.with_nonneg()))
    } else {
        Ok(base)
    }
}

pub fn run_algo(
    algo: Algo,
    built: &BuiltProblem,
    s: &RunSettings,
    seed: u64,
) -> Result<Trace> {
    let test = built.test.as_ref();
    match algo {
        Algo::Bpg => {
            let cfg = BpgConfig {
                lam: s.lam,
                max_iters: s.iters,
                seed,
                init_range: (s.init_lo, s.init_hi),
                tol: s.tol,
            };
            run_bpg_traced(&built.problem, &cfg, test)
        }
        Algo::BpgWb | Algo::Cocain => {
            let cfg = CocainConfig {
                delta: s.delta,
                eps: s.epsilon,
                lbar0: s.lbar0,
                nu: s.nu,
                lbar_min: s.lbar_min,
                gamma_shrink: s.gamma_shrink,
                max_iters: s.iters,
                seed,
                init_range: (s.init_lo, s.init_hi),
                tol: s.tol,
                ..CocainConfig::default()
            };
            if algo == Algo::Cocain {
                run_cocain_traced(&built.problem, &cfg, test)
            } else {
                run_bpg_wb_traced(&built.problem, &cfg, test)
            }
        }
        Algo::Palm | Algo::Ipalm => {
            let beta = if algo == Algo::Palm { 0.0 } else { s.beta };
            let cfg = PalmConfig {
                beta,
                max_iters: s.iters,
                seed,
                init_range: (s.init_lo, s.init_hi),
                tol: s.tol,
            };
            run_palm_traced(&built.problem, &cfg, test)
        }
    }
}

pub fn cmd_run(algo: Algo, s: &RunSettings, out: &Path) -> Result<()> {
    let built = build_problem(s)?;
    let trace = run_algo(algo, &built, s, s.seed)?;
    write_atomic(out, &trace_to_csv(&trace, s.timing))?;
    if let Some(ids) = &built.id_map {
        let ids_path = out.with_extension("ids.csv");
        write_atomic(&ids_path, &id_map_csv(ids))?;
    }
    let last = trace.records.last().expect("at least one iteration");
    println!(
        "{}: {} iterations, final objective {:.6e}{} -> {}",
        algo.name(),
        last.iter,
        last.objective,
        last.test_rmse.map(|r| format!(", test RMSE {r:.4}")).unwrap_or_default(),
        out.display()
    );
    Ok(())
}

fn id_map_csv(ids: &MovieLensData) -> String {
    let mut out = String::from("kind,index,original_id\n");
    for (i, id) in ids.user_ids.iter().enumerate() {
        let _ = writeln!(out, "user,{i},{id}");
    }
    for (j, id) in ids.item_ids.iter().enumerate() {
        let _ = writeln!(out, "item,{j},{id}");
    }
    out
}

/// The comparison grid of the statistical evaluation: both iPALM settings
/// run alongside PALM and the Bregman methods.
const STATS_GRID: [(Algo, f64); 6] = [
    (Algo::Bpg, 0.0),
    (Algo::BpgWb, 0.0),
    (Algo::Cocain, 0.0),
    (Algo::Palm, 0.0),
    (Algo::Ipalm, 0.2),
    (Algo::Ipalm, 0.4),
];

pub fn cmd_stats(s: &RunSettings, seeds: usize, out: &Path) -> Result<()> {
    if seeds == 0 {
        return Err(Error::InvalidInput("--seeds must be >= 1".into()));
    }
    let built = build_problem(s)?;
    let mut per_seed = String::from("algo,seed,final_objective\n");
    let mut finals: Vec<Vec<f64>> = vec![Vec::new(); STATS_GRID.len()];
    for (gi, (algo, beta)) in STATS_GRID.iter().enumerate() {
        let label = grid_label(*algo, *beta);
        for i in 0..seeds {
            let seed = s.seed.wrapping_add(i as u64);
            let mut settings = s.clone();
            settings.beta = if *algo == Algo::Ipalm { *beta } else { s.beta };
            let trace = run_algo(*algo, &built, &settings, seed)?;
            let final_obj = trace.final_objective().expect("nonempty trace");
            let _ = writeln!(per_seed, "{label},{seed},{final_obj}");
            finals[gi].push(final_obj);
        }
    }
    write_atomic(out, &per_seed)?;

    let mut summary = String::from("algo,min,q25,median,q75,max\n");
    for (gi, (algo, beta)) in STATS_GRID.iter().enumerate() {
        let mut v = finals[gi].clone();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite objectives"));
        let q = |f: f64| v[((f * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{}",
            grid_label(*algo, *beta),
            v[0],
            q(0.25),
            q(0.5),
            q(0.75),
            v[v.len() - 1]
        );
    }
    let summary_path = summary_path(out);
    write_atomic(&summary_path, &summary)?;
    println!(
        "stats: {} algorithms x {} seeds -> {} and {}",
        STATS_GRID.len(),
        seeds,
        out.display(),
        summary_path.display()
    );
    Ok(())
}

fn grid_label(algo: Algo, beta: f64) -> String {
    if algo == Algo::Ipalm {
        format!("ipalm-{beta}")
    } else {
        algo.name().to_string()
    }
}

pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    out.with_file_name(format!("{stem}-summary.csv"))
}
