//! Partial norms, the dependence estimator `D_F`, median-of-means norm
//! estimation and the sampled 2-norm partition cost.
//!
//! All estimators take an explicit sample stream and are deterministic given
//! that stream. The Hamming norm of a `Z_q` value is `Pr[value != 0]`; the
//! `p`-norm of a real value is `E[|value|^p]^(1/p)`.

use rand::Rng;
use rayon::prelude::*;

use crate::domain::{Codomain, GroupValue, RngSeed};
use crate::error::{Error, Result};
use crate::oracle::{Evaluator, Oracle};
use crate::partition::Partition;

/// Which partial norm to use on the codomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    /// `Pr[F != 0]` over `Z_q`.
    HammingZq,
    /// `E[|F|^p]^(1/p)` over the reals, `p >= 1`.
    RealP(f64),
}

impl NormSpec {
    pub fn real_p(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p-norm needs p >= 1, got {p}")));
        }
        Ok(NormSpec::RealP(p))
    }

    /// Exponent used by the budget formula; 1 for Hamming.
    pub fn p(&self) -> f64 {
        match self {
            NormSpec::HammingZq => 1.0,
            NormSpec::RealP(p) => *p,
        }
    }

    pub fn accepts(&self, codomain: Codomain) -> bool {
        matches!(
            (self, codomain),
            (NormSpec::HammingZq, Codomain::Zq(_)) | (NormSpec::RealP(_), Codomain::Real)
        )
    }

    pub fn check(&self, codomain: Codomain) -> Result<()> {
        if let NormSpec::RealP(p) = self {
            if !(p.is_finite() && *p >= 1.0) {
                return Err(Error::InvalidParameter(format!("p-norm needs p >= 1, got {p}")));
            }
        }
        if self.accepts(codomain) {
            Ok(())
        } else {
            Err(Error::CodomainMismatch(format!("norm {self:?} on codomain {codomain:?}")))
        }
    }

    /// The per-sample quantity whose mean is averaged: the indicator of a
    /// nonzero value, or `|x|^p`.
    pub fn term(&self, v: &GroupValue) -> Result<f64> {
        self.check(v.codomain())?;
        Ok(match (self, v) {
            (NormSpec::HammingZq, g) => f64::from(u8::from(!g.is_zero())),
            (NormSpec::RealP(p), GroupValue::Real(x)) => x.abs().powf(*p),
            _ => unreachable!(),
        })
    }

    /// Maps an estimate of the mean term back to the norm scale.
    pub fn finish(&self, mean: f64) -> f64 {
        match self {
            NormSpec::HammingZq => mean.max(0.0),
            NormSpec::RealP(p) => pth_root(mean, *p),
        }
    }
}

/// `max(x, 0)^(1/p)`. If `t^p <= x <= t^p + eps^p` then
/// `t <= pth_root(x, p) <= t + eps`.
pub fn pth_root(x: f64, p: f64) -> f64 {
    x.max(0.0).powf(1.0 / p)
}

/// Accuracy, confidence and (optionally overridden) sample sizes of a
/// median-of-means estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorBudget {
    pub epsilon: f64,
    pub gamma: f64,
    samples_per_mean: Option<usize>,
    repetitions: Option<usize>,
}

impl EstimatorBudget {
    pub fn new(epsilon: f64, gamma: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must be in (0, 1), got {gamma}")));
        }
        Ok(EstimatorBudget { epsilon, gamma, samples_per_mean: None, repetitions: None })
    }

    pub fn with_samples_per_mean(mut self, m: usize) -> Self {
        self.samples_per_mean = Some(m.max(1));
        self
    }

    pub fn with_repetitions(mut self, r: usize) -> Self {
        self.repetitions = Some(r.max(1));
        self
    }

    /// `ceil((4/eps)^(2p))` unless overridden.
    pub fn samples_per_mean(&self, p: f64) -> usize {
        self.samples_per_mean.unwrap_or_else(|| {
            let m = (4.0 / self.epsilon).powf(2.0 * p).ceil();
            if m >= usize::MAX as f64 {
                usize::MAX
            } else {
                (m as usize).max(1)
            }
        })
    }

    /// `ceil(8 ln(1/gamma))` unless overridden.
    pub fn repetitions(&self) -> usize {
        self.repetitions
            .unwrap_or_else(|| ((8.0 * (1.0 / self.gamma).ln()).ceil() as usize).max(1))
    }

    /// Same overrides, new accuracy and confidence.
    pub fn refined(&self, epsilon: f64, gamma: f64) -> Self {
        EstimatorBudget { epsilon, gamma, ..*self }
    }

    pub fn overrides(&self) -> (Option<usize>, Option<usize>) {
        (self.samples_per_mean, self.repetitions)
    }
}

/// Median of `repetitions` block means, each over `m` draws of `term`.
pub(crate) fn median_of_means<F>(m: usize, repetitions: usize, mut term: F) -> Result<f64>
where
    F: FnMut() -> Result<f64>,
{
    let mut means = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let mut sum = 0.0;
        for _ in 0..m {
            sum += term()?;
        }
        means.push(sum / m as f64);
    }
    means.sort_by(f64::total_cmp);
    Ok(means[means.len() / 2])
}

/// Estimates `||V||` for i.i.d. draws of `V` from `sampler`.
///
/// Accurate to `epsilon` with probability `1 - gamma` when the default
/// budget is used and, for `RealP`, `E|V|^(2p) <= 1`. Larger moments
/// degrade accuracy without any error being raised.
pub fn estimate_norm<S>(mut sampler: S, spec: NormSpec, budget: &EstimatorBudget) -> Result<f64>
where
    S: FnMut() -> Result<GroupValue>,
{
    let m = budget.samples_per_mean(spec.p());
    let raw = median_of_means(m, budget.repetitions(), || spec.term(&sampler()?))?;
    Ok(spec.finish(raw))
}

fn check_pair(n: usize, x: &[usize], y: &[usize]) -> Result<Vec<usize>> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidSubset("X and Y must be nonempty".into()));
    }
    let mut role = vec![0u8; n];
    for (set, tag) in [(x, 1u8), (y, 2u8)] {
        for &v in set {
            if v >= n {
                return Err(Error::InvalidSubset(format!("index {v} out of range for {n} variables")));
            }
            if role[v] != 0 {
                return Err(Error::InvalidSubset(format!("variable {v} is listed twice")));
            }
            role[v] = tag;
        }
    }
    Ok((0..n).filter(|&v| role[v] == 0).collect())
}

/// Reusable sampler of `D_F(X, Y)` that keeps its buffers between draws.
pub struct DependenceSampler<'a> {
    oracle: &'a Oracle,
    x: Vec<usize>,
    y: Vec<usize>,
    z: Vec<usize>,
    pts: [Vec<f64>; 4],
}

impl<'a> DependenceSampler<'a> {
    pub fn new(oracle: &'a Oracle, x: &[usize], y: &[usize]) -> Result<Self> {
        let z = check_pair(oracle.n(), x, y)?;
        let n = oracle.n();
        Ok(DependenceSampler {
            oracle,
            x: x.to_vec(),
            y: y.to_vec(),
            z,
            pts: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        })
    }

    /// Draws `(X, X', Y, Y', Z)` and fills the four query points
    /// `(X,Y,Z), (X',Y',Z), (X',Y,Z), (X,Y',Z)`.
    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let d = self.oracle.domain();
        let [a, b, c, e] = &mut self.pts;
        d.fill(a, &self.x, rng);
        d.fill(a, &self.y, rng);
        d.fill(a, &self.z, rng);
        d.fill(b, &self.x, rng);
        d.fill(b, &self.y, rng);
        for &v in &self.z {
            b[v] = a[v];
        }
        c.copy_from_slice(b);
        e.copy_from_slice(a);
        for &v in &self.y {
            c[v] = a[v];
            e[v] = b[v];
        }
    }

    /// One draw of `D_F`; exactly four oracle queries.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<GroupValue> {
        self.draw(rng);
        let o = self.oracle;
        let [a, b, c, e] = &self.pts;
        match o.evaluator() {
            Evaluator::Real(_) => {
                let v = o.query_real(a)? + o.query_real(b)? - o.query_real(c)? - o.query_real(e)?;
                GroupValue::real(v)
            }
            Evaluator::Zq { .. } => o.query(a)?.add(o.query(b)?)?.sub(o.query(c)?.add(o.query(e)?)?),
        }
    }
}

/// One draw of `D_F(X, Y) = F(X,Y,Z) + F(X',Y',Z) - F(X',Y,Z) - F(X,Y',Z)`.
pub fn sample_df<R: Rng + ?Sized>(
    oracle: &Oracle,
    x: &[usize],
    y: &[usize],
    rng: &mut R,
) -> Result<GroupValue> {
    DependenceSampler::new(oracle, x, y)?.sample(rng)
}

/// One-sided estimate of `e = ||D_F(X, Y)||`: with probability at least
/// `1 - gamma`, `e <= result <= e + epsilon`.
pub fn estimate_dependence<R: Rng + ?Sized>(
    oracle: &Oracle,
    x: &[usize],
    y: &[usize],
    spec: NormSpec,
    budget: &EstimatorBudget,
    rng: &mut R,
) -> Result<f64> {
    spec.check(oracle.codomain())?;
    let mut s = DependenceSampler::new(oracle, x, y)?;
    let half = budget.epsilon / 2.0;
    let raw = estimate_norm(|| s.sample(rng), spec, &budget.refined(half, budget.gamma))?;
    Ok(raw + half)
}

/// Symmetric matrix of pairwise dependence estimates `e^(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceGraph {
    n: usize,
    weights: Vec<f64>,
    budget: Option<EstimatorBudget>,
}

impl DependenceGraph {
    /// Builds a graph from explicit weights given as a full matrix.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut weights = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter("weight matrix must be square".into()));
            }
            for (j, &w) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidParameter(format!("weight ({i}, {j}) = {w}")));
                }
                if w != rows[j][i] {
                    return Err(Error::InvalidParameter(format!("weights ({i}, {j}) not symmetric")));
                }
                weights[i * n + j] = w;
            }
        }
        Ok(DependenceGraph { n, weights, budget: None })
    }

    /// Builds a graph from `(i, j, w)` triples; unspecified pairs weigh 0.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![vec![0.0; n]; n];
        for &(i, j, w) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidParameter(format!("bad edge ({i}, {j})")));
            }
            rows[i][j] = w;
            rows[j][i] = w;
        }
        Self::from_matrix(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn budget(&self) -> Option<&EstimatorBudget> {
        self.budget.as_ref()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.n.max(1)).map(<[f64]>::to_vec).take(self.n).collect()
    }

    /// All `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push((i, j, self.weight(i, j)));
            }
        }
        out
    }
}

/// Index of the unordered pair `(i, j)`, `i < j`, in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> u64 {
    (i * n - i * (i + 1) / 2 + (j - i - 1)) as u64
}

/// Estimates every pairwise score `e^(x, y)`, each with failure probability
/// `gamma / n^2` on its own substream `pair_index(x, y)`.
pub fn build_dependence_graph(
    oracle: &Oracle,
    spec: NormSpec,
    budget: &EstimatorBudget,
    seed: &RngSeed,
) -> Result<DependenceGraph> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::InvalidParameter("dependence graph needs n >= 2".into()));
    }
    spec.check(oracle.codomain())?;
    let pair_budget = budget.refined(budget.epsilon, budget.gamma / (n * n) as f64);
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let estimates: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut rng = seed.substream(pair_index(n, i, j)).rng();
            estimate_dependence(oracle, &[i], &[j], spec, &pair_budget, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut weights = vec![0.0; n * n];
    for (&(i, j), &w) in pairs.iter().zip(&estimates) {
        weights[i * n + j] = w;
        weights[j * n + i] = w;
    }
    Ok(DependenceGraph { n, weights, budget: Some(*budget) })
}

/// Estimates `delta_{R,2}(P)^2 = E[G^2] - sum_i E[G(X) G(X'_{-i}, X_i)]`
/// with `G = F - E[F]`, to within `epsilon` with probability `1 - gamma`.
///
/// `E[F]` comes from a separate batch of one block's size. Each sample
/// costs `k + 1` queries.
pub fn estimate_partition_cost_sq<R: Rng + ?Sized>(
    oracle: &Oracle,
    partition: &Partition,
    budget: &EstimatorBudget,
    rng: &mut R,
) -> Result<f64> {
    oracle.require_real()?;
    let n = oracle.n();
    if partition.n() != n {
        return Err(Error::InvalidPartition(format!(
            "partition of {} variables for an oracle of {n}",
            partition.n()
        )));
    }
    let d = oracle.domain();
    let all: Vec<usize> = (0..n).collect();
    let m = budget.samples_per_mean(1.0);
    let mut x = vec![0.0; n];
    let mut xp = vec![0.0; n];

    let mut mean = 0.0;
    for _ in 0..m {
        d.fill(&mut x, &all, rng);
        mean += oracle.query_real(&x)?;
    }
    mean /= m as f64;

    let blocks = partition.blocks();
    let mut mixed = vec![0.0; n];
    median_of_means(m, budget.repetitions(), || {
        d.fill(&mut x, &all, rng);
        d.fill(&mut xp, &all, rng);
        let g = oracle.query_real(&x)? - mean;
        let mut s = g * g;
        for b in blocks {
            mixed.copy_from_slice(&xp);
            for &v in b {
                mixed[v] = x[v];
            }
            s -= g * (oracle.query_real(&mixed)? - mean);
        }
        Ok(s)
    })
}

/// `sqrt(max(0, estimate_partition_cost_sq))`.
pub fn estimate_partition_cost_l2<R: Rng + ?Sized>(
    oracle: &Oracle,
    partition: &Partition,
    budget: &EstimatorBudget,
    rng: &mut R,
) -> Result<f64> {
    Ok(estimate_partition_cost_sq(oracle, partition, budget, rng)?.max(0.0).sqrt())
}
