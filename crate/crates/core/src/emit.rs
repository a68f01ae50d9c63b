//! Machine-readable outputs.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `k` | drift exponent or linear coefficient |
//! | `gamma` | step-size exponent |
//! | `prediction` | `non_convergence` or `convergence` |
//! | `n_converged`, `n_escaped`, `n_undecided` | outcome counts |
//! | `p_conv` | converged fraction |
//! | `ci_lo`, `ci_hi` | Wilson 95% interval for `p_conv` |
//! | `seed` | base seed of the cell |
//!
//! The JSON form holds the same rows plus the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{PhaseCell, Prediction};
use crate::error::{Error, Result};
use crate::experiment::RunManifest;

pub const CSV_HEADER: &str = "k,gamma,prediction,n_converged,n_escaped,n_undecided,p_conv,ci_lo,ci_hi,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub k: f64,
    pub gamma: f64,
    pub prediction: Prediction,
    pub n_converged: u64,
    pub n_escaped: u64,
    pub n_undecided: u64,
    pub p_conv: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl From<&PhaseCell> for Row {
    fn from(c: &PhaseCell) -> Self {
        let r = &c.result;
        Row {
            k: c.k,
            gamma: c.gamma,
            prediction: c.prediction,
            n_converged: r.counts.converged,
            n_escaped: r.counts.escaped,
            n_undecided: r.counts.undecided,
            p_conv: r.converged.p,
            ci_lo: r.converged.ci.lo,
            ci_hi: r.converged.ci.hi,
            seed: c.seed,
        }
    }
}

pub fn rows(cells: &[PhaseCell]) -> Vec<Row> {
    cells.iter().map(Row::from).collect()
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.gamma,
            r.prediction.as_str(),
            r.n_converged,
            r.n_escaped,
            r.n_undecided,
            r.p_conv,
            r.ci_lo,
            r.ci_hi,
            r.seed
        );
    }
    out
}

/// Parses CSV produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<Row>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("CSV header does not match the results schema".into()));
    }
    let bad = |line: &str| Error::Config(format!("malformed results row: {line}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(bad(line));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
            let int = |i: usize| f[i].parse::<u64>().map_err(|_| bad(line));
            let prediction = match f[2] {
                "non_convergence" => Prediction::NonConvergence,
                "convergence" => Prediction::Convergence,
                _ => return Err(bad(line)),
            };
            Ok(Row {
                k: num(0)?,
                gamma: num(1)?,
                prediction,
                n_converged: int(3)?,
                n_escaped: int(4)?,
                n_undecided: int(5)?,
                p_conv: num(6)?,
                ci_lo: num(7)?,
                ci_hi: num(8)?,
                seed: int(9)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub manifest: RunManifest,
    pub rows: Vec<Row>,
}

pub fn to_json(doc: &ResultsDocument) -> Result<String> {
    Ok(serde_json::to_string_pretty(doc)?)
}

pub fn from_json(text: &str) -> Result<ResultsDocument> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
