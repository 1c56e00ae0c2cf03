//! Trace CSV serialization.
//!
//! Header is fixed: `iter,elapsed_sec,objective,step,inertia,lbar,lunder,test_rmse`.
//! Inapplicable columns stay empty. The elapsed column is only populated when
//! timing was requested, since wall-clock values cannot be byte-reproducible.

use std::fmt::Write as _;
use std::path::Path;

use bregmf::optimize::{Trace, TraceRecord};
use bregmf::{Error, Result};

pub const TRACE_HEADER: &str = "iter,elapsed_sec,objective,step,inertia,lbar,lunder,test_rmse";

pub fn trace_to_csv(trace: &Trace, include_timing: bool) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = write!(out, "{},", r.iter);
        if include_timing {
            let _ = write!(out, "{}", r.elapsed_sec);
        }
        let _ = write!(out, ",{},", r.objective);
        push_opt(&mut out, r.step);
        out.push(',');
        let _ = write!(out, "{}", r.inertia);
        out.push(',');
        push_opt(&mut out, r.lbar);
        out.push(',');
        push_opt(&mut out, r.lunder);
        out.push(',');
        push_opt(&mut out, r.test_rmse);
        out.push('\n');
    }
    out
}

fn push_opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(out, "{v}");
    }
}

pub fn trace_from_csv(text: &str) -> Result<Trace> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty trace file".into() })?;
    if header.trim() != TRACE_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected trace header {header:?}"),
        });
    }
    let mut records = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 8 columns, got {}", fields.len()),
            });
        }
        let req = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("bad {what}: {s:?}"),
            })
        };
        let opt = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                req(s, what).map(Some)
            }
        };
        records.push(TraceRecord {
            iter: fields[0].trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("bad iter: {:?}", fields[0]),
            })?,
            elapsed_sec: opt(fields[1], "elapsed_sec")?.unwrap_or(0.0),
            objective: req(fields[2], "objective")?,
            step: opt(fields[3], "step")?,
            inertia: req(fields[4], "inertia")?,
            lbar: opt(fields[5], "lbar")?,
            lunder: opt(fields[6], "lunder")?,
            test_rmse: opt(fields[7], "test_rmse")?,
        });
    }
    Ok(Trace { records })
}

/// Write via a temp file in the same directory followed by a rename, so a
/// crash cannot leave a half-written output.
pub fn write_atomic(path: impl AsRef<Path>, content: &str) -> Result<()> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
