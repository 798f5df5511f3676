use std::collections::HashMap;
use std::sync::Mutex;

use crate::domain::{mix_words, RngSeed};
use crate::error::{Error, Result};
use crate::estimators::{estimate_partition_cost_sq, EstimatorBudget};
use crate::exact::{mask_of, vars_of, Hypergraph, Mask};
use crate::oracle::Oracle;
use crate::partition::Partition;

/// Squared 2-norm partition cost, exact or estimated.
pub trait CutCost: Sync {
    fn n(&self) -> usize;

    /// Cost of `(side, complement)`. The empty and full sides cost 0.
    fn bipartition_cost(&self, side: Mask) -> Result<f64>;

    fn partition_cost(&self, p: &Partition) -> Result<f64>;
}

impl CutCost for Hypergraph {
    fn n(&self) -> usize {
        Hypergraph::n(self)
    }

    fn bipartition_cost(&self, side: Mask) -> Result<f64> {
        Ok(Hypergraph::bipartition_cost(self, side))
    }

    fn partition_cost(&self, p: &Partition) -> Result<f64> {
        self.cut_cost(p)
    }
}

/// Sampled costs with one fixed estimate per partition: the stream of a
/// partition is derived from its canonical encoding, and the first value is
/// memoized.
pub struct EstimatedL2Cost<'a> {
    oracle: &'a Oracle,
    budget: EstimatorBudget,
    seed: RngSeed,
    memo: Mutex<HashMap<Vec<usize>, f64>>,
}

impl<'a> EstimatedL2Cost<'a> {
    pub fn new(oracle: &'a Oracle, budget: EstimatorBudget, seed: RngSeed) -> Result<Self> {
        oracle.require_real()?;
        if oracle.n() > 64 {
            return Err(Error::TooLarge { what: "variable count", size: oracle.n() as u128, limit: 64 });
        }
        Ok(EstimatedL2Cost { oracle, budget, seed, memo: Mutex::new(HashMap::new()) })
    }

    pub fn budget(&self) -> &EstimatorBudget {
        &self.budget
    }

    pub fn oracle(&self) -> &Oracle {
        self.oracle
    }

    fn stream_of(labels: &[usize]) -> u64 {
        if labels.len() <= 64 && labels.iter().all(|&l| l < 2) {
            // Bipartitions use the bitmask of the block without variable 0.
            mask_of(&labels.iter().enumerate().filter(|(_, &l)| l == 1).map(|(v, _)| v).collect::<Vec<_>>())
        } else {
            mix_words(labels.iter().map(|&l| l as u64)) | (1 << 63)
        }
    }
}

impl CutCost for EstimatedL2Cost<'_> {
    fn n(&self) -> usize {
        self.oracle.n()
    }

    fn bipartition_cost(&self, side: Mask) -> Result<f64> {
        let n = self.n();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let side = side & full;
        if side == 0 || side == full {
            return Ok(0.0);
        }
        self.partition_cost(&Partition::bipartition(n, &vars_of(side))?)
    }

    fn partition_cost(&self, p: &Partition) -> Result<f64> {
        if p.k() == 1 {
            return Ok(0.0);
        }
        let labels = p.labels();
        if let Some(v) = self.memo.lock().expect("memo poisoned").get(&labels) {
            return Ok(*v);
        }
        let mut rng = self.seed.substream(Self::stream_of(&labels)).rng();
        let v = estimate_partition_cost_sq(self.oracle, p, &self.budget, &mut rng)?;
        Ok(*self.memo.lock().expect("memo poisoned").entry(labels).or_insert(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;

    #[test]
    fn estimates_are_memoized_and_seeded() {
        let o = Oracle::real(Domain::rademacher(3).unwrap(), |a| a[0] * a[1] + 0.5 * a[1] * a[2]);
        let b = EstimatorBudget::new(0.2, 0.2).unwrap().with_samples_per_mean(100).with_repetitions(3);
        let c = EstimatedL2Cost::new(&o, b, RngSeed::new(1)).unwrap();
        let first = c.bipartition_cost(0b011).unwrap();
        let q = o.queries();
        assert_eq!(c.bipartition_cost(0b100).unwrap(), first);
        assert_eq!(o.queries(), q);
        let again = EstimatedL2Cost::new(&o, b, RngSeed::new(1)).unwrap();
        assert_eq!(again.bipartition_cost(0b011).unwrap(), first);
        assert_eq!(c.bipartition_cost(0).unwrap(), 0.0);
    }
}
