//! Partitions of the variable set.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `k` disjoint nonempty blocks covering `0..n`.
///
/// Stored canonically: each block ascending, blocks ordered by their
/// minimum element. Two partitions are equal iff their blocks are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            b.sort_unstable();
            for &v in b.iter() {
                if v >= n {
                    return Err(Error::InvalidPartition(format!("variable {v} out of range 0..{n}")));
                }
                if seen[v] {
                    return Err(Error::InvalidPartition(format!("variable {v} appears twice")));
                }
                seen[v] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("variable {missing} is not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { n, blocks })
    }

    /// Builds a partition from per-variable block labels (any label values).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let n = labels.len();
        let mut order: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (v, &l) in labels.iter().enumerate() {
            match order.iter().position(|&x| x == l) {
                Some(i) => blocks[i].push(v),
                None => {
                    order.push(l);
                    blocks.push(vec![v]);
                }
            }
        }
        Partition::new(n, blocks)
    }

    /// The bipartition `(side, complement)`; both sides must be nonempty.
    pub fn bipartition(n: usize, side: &[usize]) -> Result<Self> {
        let mut inside = vec![false; n];
        for &v in side {
            if v >= n {
                return Err(Error::InvalidPartition(format!("variable {v} out of range 0..{n}")));
            }
            inside[v] = true;
        }
        let a: Vec<usize> = (0..n).filter(|&v| inside[v]).collect();
        let b: Vec<usize> = (0..n).filter(|&v| !inside[v]).collect();
        Partition::new(n, vec![a, b])
    }

    pub fn single_block(n: usize) -> Self {
        Partition { n, blocks: vec![(0..n).collect()] }
    }

    pub fn singletons(n: usize) -> Self {
        Partition { n, blocks: (0..n).map(|v| vec![v]).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Restricted-growth labels: `labels[v]` is the index of `v`'s block.
    /// This is the canonical encoding used for tie-breaking.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                labels[v] = i;
            }
        }
        labels
    }

    pub fn crossing_pairs(&self) -> Vec<(usize, usize)> {
        let labels = self.labels();
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in x + 1..self.n {
                if labels[x] != labels[y] {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `0,1|2,3`. The variable count is inferred from the largest index.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let mut block = Vec::new();
            for tok in part.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let v = tok
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidPartition(format!("bad index {tok:?}: {e}")))?;
                block.push(v);
            }
            blocks.push(block);
        }
        let n = blocks.iter().flatten().map(|v| v + 1).max().unwrap_or(0);
        Partition::new(n, blocks)
    }
}

/// Calls `f` on every partition of `0..n` into exactly `k` nonempty blocks,
/// in lexicographic order of the canonical label encoding.
pub fn for_each_partition<F: FnMut(&Partition)>(n: usize, k: usize, mut f: F) {
    if k == 0 || k > n {
        return;
    }
    let mut labels = vec![0usize; n];
    fn rec<F: FnMut(&Partition)>(
        pos: usize,
        used: usize,
        n: usize,
        k: usize,
        labels: &mut Vec<usize>,
        f: &mut F,
    ) {
        if n - pos < k - used {
            return;
        }
        if pos == n {
            if used == k {
                let p = Partition::from_labels(labels).expect("restricted growth labels");
                f(&p);
            }
            return;
        }
        let limit = (used + 1).min(k);
        for l in 0..limit {
            labels[pos] = l;
            let next_used = if l == used { used + 1 } else { used };
            rec(pos + 1, next_used, n, k, labels, f);
        }
    }
    if n == 0 {
        return;
    }
    labels[0] = 0;
    rec(1, 1, n, k, &mut labels, &mut f);
}

pub fn all_partitions(n: usize, k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    for_each_partition(n, k, |p| out.push(p.clone()));
    out
}

/// Stirling number of the second kind, saturating.
pub fn stirling2(n: usize, k: usize) -> u128 {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = (j as u128).saturating_mul(row[j]).saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[k]
}
