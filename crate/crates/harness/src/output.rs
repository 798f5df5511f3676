//! CSV rows and the JSON sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use varpart::Partition;

/// Column order of the partition and tester CSV.
pub const RESULT_HEADER: [&str; 12] = [
    "run_id",
    "seed",
    "n",
    "k",
    "algorithm",
    "partition",
    "achieved_cost",
    "optimal_cost",
    "queries",
    "wall_ms",
    "correct",
    "verdict",
];

/// One repetition of one algorithm.
///
/// Costs are `delta` under Hamming and `delta^2` under the 2-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: u64,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub algorithm: String,
    /// Blocks separated by `|`, variables by spaces.
    pub partition: String,
    pub achieved_cost: Option<f64>,
    pub optimal_cost: Option<f64>,
    pub queries: u64,
    pub wall_ms: Option<f64>,
    pub correct: Option<bool>,
    pub verdict: Option<String>,
}

impl ResultRow {
    /// `achieved / optimal`, with `0 / 0 = 1`.
    pub fn optimality_ratio(&self) -> Option<f64> {
        let (a, o) = (self.achieved_cost?, self.optimal_cost?);
        Some(if o > 1e-12 {
            a / o
        } else if a <= 1e-12 {
            1.0
        } else {
            f64::INFINITY
        })
    }
}

/// One pairwise dependence estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub run_id: u64,
    pub seed: u64,
    pub i: usize,
    pub j: usize,
    pub estimate: f64,
    pub exact: Option<f64>,
}

pub fn format_partition(p: &Partition) -> String {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("|")
}

pub fn parse_partition(s: &str) -> Result<Partition> {
    let blocks = s
        .split('|')
        .map(|b| b.split_whitespace().map(|v| v.parse::<usize>().context("variable index")).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let n = blocks.iter().map(Vec::len).sum();
    Ok(Partition::new(n, blocks)?)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

pub fn read_result_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `results.csv` gets `results.json` next to it.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes the rows to `path` and the spec plus `extra` to the sidecar.
pub fn write_outputs<T: Serialize, S: Serialize, E: Serialize>(
    path: &Path,
    rows: &[T],
    spec: &S,
    extra: E,
) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(rows, file)?;
    let side = serde_json::json!({ "spec": spec, "rows": rows.len(), "summary": extra });
    let text = serde_json::to_string_pretty(&side)?;
    let sp = sidecar_path(path);
    fs::write(&sp, text + "\n").with_context(|| format!("writing {}", sp.display()))?;
    Ok(())
}
