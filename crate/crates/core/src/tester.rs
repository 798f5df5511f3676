use rand::Rng;
use rayon::prelude::*;

use crate::domain::{Codomain, Domain, RngSeed};
use crate::error::{Error, Result};
use crate::estimators::{pth_root, NormSpec};
use crate::oracle::{Evaluator, Oracle};
use crate::union_find::UnionFind;

/// Loop constant `C` in the default round count `ceil(C k n / epsilon)`.
pub const ROUNDS_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TesterConfig {
    pub k: usize,
    pub epsilon: f64,
    pub rounds: usize,
    /// Per-pair `D_F` draws for real codomains; `None` uses `ceil((4k/epsilon)^(2p))`.
    pub p_norm_subbudget: Option<usize>,
    /// Exponent of the p-norm used for real codomains.
    pub p: f64,
}

impl TesterConfig {
    pub fn new(n: usize, k: usize, epsilon: f64) -> Result<Self> {
        Self::with_constant(n, k, epsilon, ROUNDS_CONSTANT)
    }

    pub fn with_constant(n: usize, k: usize, epsilon: f64, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("round constant must be > 0, got {c}")));
        }
        let rounds = (c * k as f64 * n as f64 / epsilon).ceil();
        let config = TesterConfig {
            k,
            epsilon,
            rounds: if rounds.is_finite() { rounds.max(1.0) as usize } else { 0 },
            p_norm_subbudget: None,
            p: 2.0,
        };
        config.validate(n)?;
        Ok(config)
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_subbudget(mut self, draws: usize) -> Self {
        self.p_norm_subbudget = Some(draws);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if self.k < 2 || self.k > n {
            return Err(Error::InvalidParameter(format!("tester needs 2 <= k <= n = {n}, got {}", self.k)));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be >= 1".into()));
        }
        NormSpec::real_p(self.p)?;
        if self.p_norm_subbudget == Some(0) {
            return Err(Error::InvalidParameter("p-norm subbudget must be >= 1".into()));
        }
        Ok(())
    }

    /// `D_F` draws per pair and round: 1 over `Z_q`, the subbudget over the reals.
    pub fn draws_per_pair(&self, codomain: Codomain) -> Result<usize> {
        match codomain {
            Codomain::Zq(_) => Ok(1),
            Codomain::Real => match self.p_norm_subbudget {
                Some(m) => Ok(m),
                None => {
                    let m = (4.0 * self.k as f64 / self.epsilon).powf(2.0 * self.p).ceil();
                    if m > 1e12 {
                        return Err(Error::TooLarge { what: "p-norm subbudget", size: m as u128, limit: 1_000_000_000_000 });
                    }
                    Ok(m as usize)
                }
            },
        }
    }

    /// Edge threshold on the empirical p-norm for real codomains.
    pub fn real_threshold(&self, n: usize) -> f64 {
        self.epsilon / (4.0 * self.k as f64 * (n * n) as f64)
    }

    /// Exact number of queries a run makes.
    pub fn query_budget(&self, n: usize, codomain: Codomain) -> Result<u64> {
        let pairs = (n * (n - 1) / 2) as u64;
        Ok(4 * self.rounds as u64 * pairs * self.draws_per_pair(codomain)? as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TesterReport {
    pub verdict: Verdict,
    pub queries_used: u64,
    /// Edges `(i, j)` with `i < j`, sorted.
    pub witness_graph: Vec<(usize, usize)>,
}

/// The four query points of one `D_F({i}, {j})` draw:
/// `(X,Y,Z), (X',Y',Z), (X',Y,Z), (X,Y',Z)`.
pub type Tuple = [Vec<f64>; 4];

fn draw_tuple<R: Rng + ?Sized>(domain: &Domain, i: usize, j: usize, rng: &mut R, t: &mut Tuple) {
    let [a, b, c, e] = t;
    for v in 0..domain.n() {
        if v != i && v != j {
            a[v] = domain.alphabet(v).sample(rng);
        }
    }
    a[i] = domain.alphabet(i).sample(rng);
    a[j] = domain.alphabet(j).sample(rng);
    b.copy_from_slice(a);
    b[i] = domain.alphabet(i).sample(rng);
    b[j] = domain.alphabet(j).sample(rng);
    c.copy_from_slice(b);
    c[j] = a[j];
    e.copy_from_slice(a);
    e[j] = b[j];
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Visits every tuple of one round in query order.
fn for_each_tuple_in_round<F>(domain: &Domain, draws: usize, seed: &RngSeed, round: usize, mut f: F) -> Result<()>
where
    F: FnMut(usize, usize, &Tuple) -> Result<()>,
{
    let n = domain.n();
    let mut rng = seed.substream(round as u64).rng();
    let mut t: Tuple = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, j) in pairs(n) {
        for _ in 0..draws {
            draw_tuple(domain, i, j, &mut rng, &mut t);
            f(i, j, &t)?;
        }
    }
    Ok(())
}

/// Every point the tester will query, round by round, computed without an
/// oracle.
pub fn query_schedule(domain: &Domain, codomain: Codomain, config: &TesterConfig, seed: &RngSeed) -> Result<Vec<Tuple>> {
    config.validate(domain.n())?;
    let draws = config.draws_per_pair(codomain)?;
    let mut out = Vec::new();
    for r in 0..config.rounds {
        for_each_tuple_in_round(domain, draws, seed, r, |_, _, t| {
            out.push(t.clone());
            Ok(())
        })?;
    }
    Ok(out)
}

/// Non-adaptive one-sided test of k-partitionability. Each round draws, for
/// every pair of variables, `D_F({i}, {j})` and adds the edge `{i, j}` when
/// it is nonzero (over `Z_q`) or when the empirical p-norm of the draws
/// exceeds `epsilon / (4 k n^2)` (over the reals). Accepts iff the final
/// graph has at least `k` components.
pub fn test_k_partitionable(oracle: &Oracle, config: &TesterConfig, seed: &RngSeed) -> Result<TesterReport> {
    let n = oracle.n();
    config.validate(n)?;
    let domain = oracle.domain();
    let draws = config.draws_per_pair(oracle.codomain())?;
    let threshold = config.real_threshold(n);
    let per_round: Vec<(Vec<(usize, usize)>, u64)> = (0..config.rounds)
        .into_par_iter()
        .map(|r| {
            let mut edges = Vec::new();
            let mut queries = 0u64;
            let mut acc = 0.0;
            let mut seen = 0usize;
            for_each_tuple_in_round(domain, draws, seed, r, |i, j, t| {
                queries += 4;
                match oracle.evaluator() {
                    Evaluator::Zq { .. } => {
                        let d = oracle.query(&t[0])?.add(oracle.query(&t[1])?)?;
                        let d = d.sub(oracle.query(&t[2])?.add(oracle.query(&t[3])?)?)?;
                        if !d.is_zero() {
                            edges.push((i, j));
                        }
                    }
                    Evaluator::Real(_) => {
                        let d = oracle.query_real(&t[0])? + oracle.query_real(&t[1])?
                            - oracle.query_real(&t[2])?
                            - oracle.query_real(&t[3])?;
                        acc += d.abs().powf(config.p);
                        seen += 1;
                        if seen == draws {
                            if pth_root(acc / draws as f64, config.p) > threshold {
                                edges.push((i, j));
                            }
                            acc = 0.0;
                            seen = 0;
                        }
                    }
                }
                Ok(())
            })?;
            Ok((edges, queries))
        })
        .collect::<Result<_>>()?;
    let mut uf = UnionFind::new(n);
    let mut witness = Vec::new();
    let mut queries_used = 0;
    for (edges, q) in per_round {
        queries_used += q;
        for (i, j) in edges {
            uf.union(i, j);
            witness.push((i, j));
        }
    }
    witness.sort_unstable();
    witness.dedup();
    let verdict = if uf.components() >= config.k { Verdict::Accept } else { Verdict::Reject };
    Ok(TesterReport { verdict, queries_used, witness_graph: witness })
}

/// Probability that at least one of several independent events occurs.
pub fn union_probability(ps: &[f64]) -> f64 {
    1.0 - ps.iter().map(|p| 1.0 - p).product::<f64>()
}

/// Lower bound `1 - e^{-s}` on [`union_probability`] when the probabilities
/// sum to at least `s`.
pub fn union_probability_lower_bound(s: f64) -> f64 {
    1.0 - (-s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{additive_oracle, BlockFunction};
    use crate::partition::Partition;
    use rand::SeedableRng;

    fn zq_additive(n: usize, blocks: Vec<Vec<usize>>) -> Oracle {
        let p = Partition::new(n, blocks).unwrap();
        let fs = (0..p.k())
            .map(|b| BlockFunction::zq(2, move |a: &[f64]| (a.iter().map(|x| *x as u64).product::<u64>() + b as u64) % 2))
            .collect();
        additive_oracle(&Domain::uniform_zq(n, 2).unwrap(), &p, fs).unwrap()
    }

    #[test]
    fn query_accounting_is_exact() {
        let o = zq_additive(5, vec![vec![0, 1], vec![2, 3, 4]]);
        let c = TesterConfig::new(5, 2, 0.5).unwrap();
        assert_eq!(c.rounds, 160);
        let r = test_k_partitionable(&o, &c, &RngSeed::new(3)).unwrap();
        assert_eq!(r.queries_used, 4 * 160 * 10);
        assert_eq!(r.queries_used, o.queries());
        assert_eq!(r.queries_used, c.query_budget(5, o.codomain()).unwrap());
        assert_eq!(r.verdict, Verdict::Accept);
        assert!(r.witness_graph.iter().all(|&(i, j)| (i < 2) == (j < 2)));
    }

    #[test]
    fn parity_is_rejected() {
        let o = Oracle::zq(Domain::uniform_zq(4, 2).unwrap(), 2, |a| a.iter().map(|x| *x as u64).product::<u64>()).unwrap();
        let c = TesterConfig::new(4, 2, 0.5).unwrap();
        let r = test_k_partitionable(&o, &c, &RngSeed::new(0)).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
        assert_eq!(r.witness_graph.len(), 6);
    }

    #[test]
    fn schedule_matches_queries() {
        let o = Oracle::real(Domain::rademacher(4).unwrap(), |a| a[0] * a[1]);
        let c = TesterConfig::new(4, 2, 0.5).unwrap().with_rounds(3).with_subbudget(2);
        let seed = RngSeed::new(11);
        let sched = query_schedule(o.domain(), o.codomain(), &c, &seed).unwrap();
        assert_eq!(sched.len() as u64 * 4, c.query_budget(4, Codomain::Real).unwrap());
        let r = test_k_partitionable(&o, &c, &seed).unwrap();
        assert_eq!(r.queries_used, sched.len() as u64 * 4);
    }

    #[test]
    fn config_errors() {
        assert!(TesterConfig::new(3, 4, 0.5).is_err());
        assert!(TesterConfig::new(3, 1, 0.5).is_err());
        assert!(TesterConfig::new(3, 2, 0.0).is_err());
        assert!(TesterConfig::new(3, 2, 1.5).is_err());
        let c = TesterConfig::new(3, 2, 0.5).unwrap();
        assert_eq!(c.draws_per_pair(Codomain::Real).unwrap(), 65536);
        assert!(c.with_rounds(0).validate(3).is_err());
    }

    #[test]
    fn union_probability_fact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let len = rng.gen_range(1..20);
            let ps: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() * 0.2).collect();
            let s: f64 = ps.iter().sum();
            let eps = s.min(1.0) * rng.gen::<f64>();
            let u = union_probability(&ps);
            assert!(u >= union_probability_lower_bound(eps) - 1e-12);
            assert!(union_probability_lower_bound(eps) >= eps - eps * eps / 2.0 - 1e-12);
        }
    }
}
