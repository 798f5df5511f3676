use super::cost::{CutCost, EstimatedL2Cost};
use super::queyranne::{queyranne_min_bipartition, SetFunctionOracle};
use crate::domain::RngSeed;
use crate::error::{Error, Result};
use crate::estimators::EstimatorBudget;
use crate::oracle::Oracle;
use crate::partition::Partition;

/// Result of a bipartitioning run.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitionReport {
    pub partition: Partition,
    /// Cost of the returned partition as seen by the cost oracle.
    pub cost: f64,
    /// Distinct subsets evaluated.
    pub evaluations: u64,
}

/// Per-subset budget: accuracy `epsilon / (4n)`, failure probability
/// `gamma / (n^3 + 1)`.
pub fn bipartition_query_budget(n: usize, budget: &EstimatorBudget) -> EstimatorBudget {
    let n3 = (n as f64).powi(3);
    budget.refined(budget.epsilon / (4.0 * n as f64), budget.gamma / (n3 + 1.0))
}

/// Queyranne's algorithm on the memoized symmetric set function
/// `X -> cost(X, complement of X)`.
pub fn min_bipartition_with(cost: &dyn CutCost, epsilon: f64) -> Result<BipartitionReport> {
    let n = cost.n();
    if n < 2 {
        return Err(Error::InvalidParameter("bipartitioning needs n >= 2".into()));
    }
    let g = SetFunctionOracle::symmetric(n, epsilon, |m| cost.bipartition_cost(m))?;
    let r = queyranne_min_bipartition(&g)?;
    Ok(BipartitionReport {
        partition: Partition::bipartition(n, &r.side)?,
        cost: r.value,
        evaluations: g.evaluations(),
    })
}

/// Learns a bipartition `(X, complement)` with
/// `delta(X)^2 <= delta_2(F)^2 + epsilon` with probability `1 - gamma`.
pub fn bipartition_l2(oracle: &Oracle, budget: &EstimatorBudget, seed: &RngSeed) -> Result<Partition> {
    Ok(bipartition_l2_report(oracle, budget, seed)?.partition)
}

pub fn bipartition_l2_report(
    oracle: &Oracle,
    budget: &EstimatorBudget,
    seed: &RngSeed,
) -> Result<BipartitionReport> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::InvalidParameter("bipartitioning needs n >= 2".into()));
    }
    let per_query = bipartition_query_budget(n, budget);
    let cost = EstimatedL2Cost::new(oracle, per_query, *seed)?;
    min_bipartition_with(&cost, 4.0 * per_query.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::exact::{efron_stein_decompose, optimal_hypergraph_partition, Hypergraph};

    #[test]
    fn quadratic_example_recovers_optimum() {
        let o = Oracle::real(Domain::rademacher(3).unwrap(), |a| a[0] * a[1] + 0.5 * a[1] * a[2]);
        let h = Hypergraph::from_function(&efron_stein_decompose(&o).unwrap());
        let (opt, _) = optimal_hypergraph_partition(&h, 2).unwrap();
        let b = EstimatorBudget::new(0.1, 0.1).unwrap().with_samples_per_mean(2000).with_repetitions(5);
        for s in 0..10 {
            assert_eq!(bipartition_l2(&o, &b, &RngSeed::new(s)).unwrap(), opt);
        }
    }

    #[test]
    fn exact_hypergraph_route() {
        let h = Hypergraph::new(4, vec![(vec![0, 1], 3.0), (vec![2, 3], 2.0), (vec![1, 2], 0.5)]).unwrap();
        let r = min_bipartition_with(&h, 0.0).unwrap();
        assert_eq!(r.partition, Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap());
        assert_eq!(r.cost, 0.5);
    }

    #[test]
    fn rejects_zq() {
        let o = Oracle::zq(Domain::uniform_zq(3, 2).unwrap(), 2, |_| 0).unwrap();
        let b = EstimatorBudget::new(0.1, 0.1).unwrap();
        assert!(bipartition_l2(&o, &b, &RngSeed::new(0)).is_err());
    }
}
