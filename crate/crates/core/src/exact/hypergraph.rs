use std::collections::HashSet;
use std::fmt::Write as _;

use super::efron_stein::{mask_of, vars_of, EfronSteinTable, Mask};
use crate::error::{Error, Result};
use crate::oracles::QuadraticForm;
use crate::partition::Partition;

/// Weighted hypergraph on at most 64 vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<(Mask, f64)>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if n > 64 {
            return Err(Error::TooLarge { what: "hypergraph", size: n as u128, limit: 64 });
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (vars, w) in edges {
            if vars.is_empty() {
                return Err(Error::InvalidParameter("empty hyperedge".into()));
            }
            if let Some(v) = vars.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidParameter(format!("vertex {v} out of range 0..{n}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter(format!("hyperedge weight {w}")));
            }
            let m = mask_of(&vars);
            if m.count_ones() as usize != vars.len() {
                return Err(Error::InvalidParameter(format!("repeated vertex in {vars:?}")));
            }
            if !seen.insert(m) {
                return Err(Error::InvalidParameter(format!("duplicate hyperedge {vars:?}")));
            }
            out.push((m, w));
        }
        Ok(Hypergraph { n, edges: out })
    }

    /// Hyperedges `S` with `|S| >= 2` weighted by `||F_S||^2`.
    pub fn from_function(table: &EfronSteinTable) -> Self {
        let edges = table
            .masks()
            .iter()
            .filter(|(m, _)| m.count_ones() >= 2)
            .map(|(&m, &w)| (m, w))
            .collect();
        Hypergraph { n: table.n(), edges }
    }

    /// The hypergraph of `scale * a^T H a` on the cube, read off the form:
    /// edge `{j, k}` has weight `(2 scale H_jk)^2`.
    pub fn from_quadratic(form: &QuadraticForm) -> Self {
        let edges = form
            .pair_coefficients()
            .into_iter()
            .map(|(j, k, c)| ((1 << j) | (1 << k), c * c))
            .collect();
        Hypergraph { n: form.n(), edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> Vec<(Vec<usize>, f64)> {
        self.edges.iter().map(|&(m, w)| (vars_of(m), w)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.1).sum()
    }

    /// Weight of hyperedges not contained in a single block.
    pub fn cut_cost(&self, partition: &Partition) -> Result<f64> {
        if partition.n() != self.n {
            return Err(Error::InvalidPartition(format!(
                "partition of {} vertices for a hypergraph on {}",
                partition.n(),
                self.n
            )));
        }
        let blocks: Vec<Mask> = partition.blocks().iter().map(|b| mask_of(b)).collect();
        Ok(self.cut_cost_masks(&blocks))
    }

    pub(crate) fn cut_cost_masks(&self, blocks: &[Mask]) -> f64 {
        self.edges
            .iter()
            .filter(|(e, _)| !blocks.iter().any(|b| e & !b == 0))
            .map(|e| e.1)
            .sum()
    }

    /// Weight of hyperedges meeting both `side` and its complement.
    pub fn bipartition_cost(&self, side: Mask) -> f64 {
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let other = full & !side;
        self.edges
            .iter()
            .filter(|(e, _)| e & side != 0 && e & other != 0)
            .map(|e| e.1)
            .sum()
    }

    /// Text form: `hg <n> <m>` then one `<weight> <size> <v1> ... <vk>` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("hg {} {}\n", self.n, self.edges.len());
        for (vars, w) in self.edges() {
            let _ = write!(s, "{w:?} {}", vars.len());
            for v in vars {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, message: String| Error::Parse { line: line + 1, message };
        let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty hypergraph file".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "hg" {
            return Err(perr(hl, "expected `hg <n> <m>`".into()));
        }
        let n: usize = toks[1].parse().map_err(|e| perr(hl, format!("{e}")))?;
        let m: usize = toks[2].parse().map_err(|e| perr(hl, format!("{e}")))?;
        let mut edges = Vec::with_capacity(m);
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 2 {
                return Err(perr(ln, "expected `<weight> <size> <vertices>`".into()));
            }
            let w: f64 = toks[0].parse().map_err(|e| perr(ln, format!("{e}")))?;
            let k: usize = toks[1].parse().map_err(|e| perr(ln, format!("{e}")))?;
            if toks.len() != k + 2 {
                return Err(perr(ln, format!("expected {k} vertices")));
            }
            let vars = toks[2..]
                .iter()
                .map(|t| t.parse::<usize>().map_err(|e| perr(ln, format!("{e}"))))
                .collect::<Result<Vec<_>>>()?;
            edges.push((vars, w));
        }
        if edges.len() != m {
            return Err(perr(0, format!("header declares {m} edges, found {}", edges.len())));
        }
        Hypergraph::new(n, edges)
    }
}
