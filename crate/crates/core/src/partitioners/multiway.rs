use rayon::prelude::*;

use super::cost::{CutCost, EstimatedL2Cost};
use crate::domain::RngSeed;
use crate::error::{Error, Result};
use crate::estimators::EstimatorBudget;
use crate::exact::Mask;
use crate::oracle::Oracle;
use crate::partition::Partition;

/// Largest `n` accepted by the terminal enumeration.
pub const MAX_MULTIWAY_N: usize = 20;

const TIE_TOLERANCE: f64 = 1e-12;

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(c.clone());
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Subsets of `0..r` ordered by size, then lexicographically.
fn ordered_subsets(r: usize) -> Vec<Mask> {
    let mut out = Vec::with_capacity(1 << r);
    for size in 0..=r {
        for c in combinations(r, size) {
            out.push(c.iter().fold(0, |m, &v| m | (1 << v)));
        }
    }
    out
}

/// Isolation-heuristic multiway cut for one terminal set: each terminal's
/// cheapest isolating side is found exhaustively; the `k - 1` cheapest are
/// applied in order and the remaining variables form the last block.
fn isolating_partition(cost: &dyn CutCost, terminals: &[usize], subsets: &[Mask]) -> Result<Partition> {
    let n = cost.n();
    let others: Vec<usize> = (0..n).filter(|v| !terminals.contains(v)).collect();
    let expand = |local: Mask| -> Mask {
        others.iter().enumerate().filter(|(i, _)| local >> i & 1 == 1).fold(0, |m, (_, &v)| m | (1 << v))
    };
    let mut cuts: Vec<(f64, usize, Mask)> = Vec::with_capacity(terminals.len());
    for (ti, &s) in terminals.iter().enumerate() {
        let mut best: Option<(f64, Mask)> = None;
        for &local in subsets {
            let side = (1 << s) | expand(local);
            let c = cost.bipartition_cost(side)?;
            if best.is_none_or(|(b, _)| c < b - TIE_TOLERANCE) {
                best = Some((c, side));
            }
        }
        let (c, side) = best.expect("at least the empty extension");
        cuts.push((c, ti, side));
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut labels = vec![usize::MAX; n];
    for (block, &(_, _, side)) in cuts.iter().take(terminals.len() - 1).enumerate() {
        for (v, l) in labels.iter_mut().enumerate() {
            if side >> v & 1 == 1 && *l == usize::MAX {
                *l = block;
            }
        }
    }
    let last = terminals.len() - 1;
    for l in labels.iter_mut().filter(|l| **l == usize::MAX) {
        *l = last;
    }
    Partition::from_labels(&labels)
}

/// Best isolation-heuristic `k`-partition over all terminal sets, measured
/// by `cost.partition_cost`. Returns the partition and its cost.
pub fn multiway_k_partition_with(cost: &dyn CutCost, k: usize) -> Result<(Partition, f64)> {
    let n = cost.n();
    if k < 3 || k > n {
        return Err(Error::InvalidParameter(format!("multiway partitioning needs 3 <= k <= n = {n}, got {k}")));
    }
    if n > MAX_MULTIWAY_N {
        return Err(Error::TooLarge { what: "multiway enumeration", size: n as u128, limit: MAX_MULTIWAY_N as u128 });
    }
    let subsets = ordered_subsets(n - k);
    let candidates: Vec<(Partition, f64)> = combinations(n, k)
        .par_iter()
        .map(|w| {
            let p = isolating_partition(cost, w, &subsets)?;
            let c = cost.partition_cost(&p)?;
            Ok((p, c))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(Partition, f64)> = None;
    for (p, c) in candidates {
        let better = match &best {
            None => true,
            Some((bp, bc)) => c < bc - TIE_TOLERANCE || (c <= bc + TIE_TOLERANCE && p.labels() < bp.labels()),
        };
        if better {
            best = Some((p, c));
        }
    }
    Ok(best.expect("at least one terminal set"))
}

/// Per-cost budget for [`multiway_k_partition`]: accuracy `epsilon / 4`,
/// failure probability split over every bipartition and terminal set.
pub fn multiway_query_budget(n: usize, k: usize, budget: &EstimatorBudget) -> EstimatorBudget {
    let queries = 2f64.powi(n as i32 - 1) + binomial(n, k) as f64;
    budget.refined(budget.epsilon / 4.0, budget.gamma / queries)
}

/// Learns a `k`-partition, `k >= 3`, with squared cost at most
/// `(2 - 2/k) delta_k(F)^2 + epsilon` with probability `1 - gamma`.
pub fn multiway_k_partition(
    oracle: &Oracle,
    k: usize,
    budget: &EstimatorBudget,
    seed: &RngSeed,
) -> Result<Partition> {
    let n = oracle.n();
    if k < 3 || k > n {
        return Err(Error::InvalidParameter(format!("multiway partitioning needs 3 <= k <= n = {n}, got {k}")));
    }
    let cost = EstimatedL2Cost::new(oracle, multiway_query_budget(n, k, budget), *seed)?;
    Ok(multiway_k_partition_with(&cost, k)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{optimal_hypergraph_partition, Hypergraph};

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(binomial(20, 3), 1140);
        let s = ordered_subsets(3);
        assert_eq!(s, vec![0, 1, 2, 4, 3, 5, 6, 7]);
    }

    #[test]
    fn n_equals_k_forces_singletons() {
        let h = Hypergraph::new(3, vec![(vec![0, 1], 1.0), (vec![1, 2], 4.0)]).unwrap();
        let (p, c) = multiway_k_partition_with(&h, 3).unwrap();
        assert_eq!(p, Partition::singletons(3));
        assert_eq!(c, optimal_hypergraph_partition(&h, 3).unwrap().1);
    }

    #[test]
    fn recovers_planted_blocks() {
        let h = Hypergraph::new(
            6,
            vec![(vec![0, 1], 2.0), (vec![2, 3], 1.5), (vec![4, 5], 3.0), (vec![1, 2], 0.1), (vec![3, 4], 0.05)],
        )
        .unwrap();
        let (p, _) = multiway_k_partition_with(&h, 3).unwrap();
        assert_eq!(p, Partition::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap());
        assert!(multiway_k_partition_with(&h, 2).is_err());
    }
}
