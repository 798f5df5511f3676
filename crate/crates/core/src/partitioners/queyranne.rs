use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{vars_of, Mask};

type SetFn<'a> = Box<dyn Fn(Mask) -> Result<f64> + Send + Sync + 'a>;

/// A set function on subsets of `0..n` (bitmasks) with a memo table: the
/// first value computed for a subset is the value forever after.
pub struct SetFunctionOracle<'a> {
    n: usize,
    evaluator: SetFn<'a>,
    memo: Mutex<HashMap<Mask, f64>>,
    epsilon: f64,
    symmetric: bool,
    evals: AtomicU64,
}

impl<'a> SetFunctionOracle<'a> {
    /// `epsilon` is the declared submodularity slack.
    pub fn new<F>(n: usize, epsilon: f64, f: F) -> Result<Self>
    where
        F: Fn(Mask) -> Result<f64> + Send + Sync + 'a,
    {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!("set functions need 1 <= n <= 64, got {n}")));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(SetFunctionOracle {
            n,
            evaluator: Box::new(f),
            memo: Mutex::new(HashMap::new()),
            epsilon,
            symmetric: false,
            evals: AtomicU64::new(0),
        })
    }

    /// Symmetric variant: `f` is only ever called on the side containing
    /// variable 0, so `g(X) = g(complement of X)`.
    pub fn symmetric<F>(n: usize, epsilon: f64, f: F) -> Result<Self>
    where
        F: Fn(Mask) -> Result<f64> + Send + Sync + 'a,
    {
        let mut s = Self::new(n, epsilon, f)?;
        s.symmetric = true;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn full(&self) -> Mask {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    fn canonical(&self, mask: Mask) -> Mask {
        if self.symmetric && mask & 1 == 0 {
            self.full() & !mask
        } else {
            mask
        }
    }

    /// Memoized `g(mask)`.
    pub fn value(&self, mask: Mask) -> Result<f64> {
        let key = self.canonical(mask);
        if let Some(v) = self.memo.lock().expect("memo poisoned").get(&key) {
            return Ok(*v);
        }
        self.evals.fetch_add(1, Ordering::Relaxed);
        let v = (self.evaluator)(key)?;
        Ok(*self.memo.lock().expect("memo poisoned").entry(key).or_insert(v))
    }

    /// Number of evaluator invocations.
    pub fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// Number of distinct subsets in the memo.
    pub fn distinct(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }

    /// Largest `g(XZ) + g(YZ) - g(XYZ) - g(Z)` violation of submodularity over
    /// the memoized values, `None` if no full square is memoized.
    pub fn observed_slack(&self) -> Option<f64> {
        let memo = self.memo.lock().expect("memo poisoned").clone();
        let get = |m: Mask| memo.get(&self.canonical(m)).copied();
        let mut worst: Option<f64> = None;
        for &a in memo.keys() {
            for &b in memo.keys() {
                if let (Some(u), Some(i)) = (get(a | b), get(a & b)) {
                    let s = u + i - memo[&a] - memo[&b];
                    worst = Some(worst.map_or(s, |w: f64| w.max(s)));
                }
            }
        }
        worst
    }
}

/// Outcome of a minimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct MinBipartition {
    pub side: Vec<usize>,
    pub value: f64,
}

/// Minimizes a symmetric set function over nontrivial subsets by pendant
/// pairs: grow an ordering from variable 0's group, each step adding the
/// group `u` minimizing `g(W u) - g(u)` (smallest index on ties); the last
/// group is a candidate, then the last two groups are merged and the process
/// repeats on one fewer group. The best candidate is returned.
///
/// With an `epsilon`-submodular `g` the result is within `n epsilon / 2` of
/// the minimum for graph-like `g` and within `(n - 1) epsilon / 2` per
/// contraction step otherwise; with an exact submodular `g` it is the minimum.
pub fn queyranne_min_bipartition(g: &SetFunctionOracle) -> Result<MinBipartition> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("minimum bipartition needs n >= 2".into()));
    }
    let mut groups: Vec<Mask> = (0..n).map(|v| 1 << v).collect();
    let mut best: Option<(Mask, f64)> = None;
    while groups.len() >= 2 {
        let m = groups.len();
        let mut w = groups[0];
        let mut remaining: Vec<usize> = (1..m).collect();
        let mut order = vec![0usize];
        while !remaining.is_empty() {
            let pick = if remaining.len() == 1 {
                0
            } else {
                let scores: Vec<f64> = remaining
                    .par_iter()
                    .map(|&u| Ok(g.value(w | groups[u])? - g.value(groups[u])?))
                    .collect::<Result<_>>()?;
                let mut pick = 0;
                for (i, &s) in scores.iter().enumerate() {
                    if s < scores[pick] {
                        pick = i;
                    }
                }
                pick
            };
            let u = remaining.remove(pick);
            w |= groups[u];
            order.push(u);
        }
        let t = order[m - 1];
        let s = order[m - 2];
        let value = g.value(groups[t])?;
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((groups[t], value));
        }
        groups[s] |= groups[t];
        groups.remove(t);
        // Groups stay ordered by their smallest variable.
        groups.sort_by_key(|m| m.trailing_zeros());
    }
    let (mask, value) = best.expect("n >= 2 gives a candidate");
    Ok(MinBipartition { side: vars_of(mask), value })
}

/// Reference minimum over all `2^(n-1) - 1` nontrivial bipartitions.
pub fn brute_force_min_bipartition(g: &SetFunctionOracle) -> Result<MinBipartition> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter("minimum bipartition needs n >= 2".into()));
    }
    let full = g.full();
    let mut best: Option<(Mask, f64)> = None;
    // Sides containing variable 0, excluding the full set.
    for rest in 0..(1u64 << (n - 1)) - 1 {
        let mask = 1 | (rest << 1);
        if mask == full {
            continue;
        }
        let v = g.value(mask)?;
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((mask, v));
        }
    }
    let (mask, value) = best.expect("n >= 2 gives a candidate");
    Ok(MinBipartition { side: vars_of(mask), value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_cut(w: Vec<(usize, usize, f64)>) -> impl Fn(Mask) -> Result<f64> {
        move |m: Mask| Ok(w.iter().filter(|(i, j, _)| (m >> i & 1) != (m >> j & 1)).map(|e| e.2).sum())
    }

    #[test]
    fn triangle() {
        let g = SetFunctionOracle::symmetric(3, 0.0, graph_cut(vec![(0, 1, 3.0), (0, 2, 1.0), (1, 2, 1.0)])).unwrap();
        let r = queyranne_min_bipartition(&g).unwrap();
        let b = brute_force_min_bipartition(&g).unwrap();
        assert_eq!(r.value, b.value);
        let side = if r.side.contains(&0) { vec![2] } else { r.side.clone() };
        assert_eq!(side, vec![2]);
    }

    #[test]
    fn constant_function() {
        let g = SetFunctionOracle::symmetric(5, 0.0, |_| Ok(0.0)).unwrap();
        let r = queyranne_min_bipartition(&g).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.side.is_empty() && r.side.len() < 5);
    }

    #[test]
    fn memo_is_first_writer() {
        let calls = AtomicU64::new(0);
        let g = SetFunctionOracle::symmetric(3, 0.0, |_| Ok(calls.fetch_add(1, Ordering::Relaxed) as f64)).unwrap();
        let a = g.value(0b001).unwrap();
        assert_eq!(g.value(0b110).unwrap(), a);
        assert_eq!(g.value(0b001).unwrap(), a);
        assert_eq!(g.evaluations(), 1);
        assert!(queyranne_min_bipartition(&SetFunctionOracle::symmetric(1, 0.0, |_| Ok(0.0)).unwrap()).is_err());
    }
}
