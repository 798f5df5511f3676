//! Brute-force ground truth for desk-scale instances: Efron-Stein
//! decompositions, hypergraph cut costs, exact partition costs under the
//! 2-norm and the Hamming metric, and exhaustive optimal k-partitions.

mod efron_stein;
mod hamming;
mod hypergraph;
mod table;

pub use efron_stein::{efron_stein_decompose, mask_of, vars_of, EfronSteinTable, Mask};
pub use hamming::{exact_delta_hamming, exact_pair_cost_hamming, exact_partition_cost_hamming};
pub use hypergraph::Hypergraph;
pub use table::{FiniteTable, TableValues, MAX_POINTS};

use crate::error::{Error, Result};
use crate::estimators::NormSpec;
use crate::oracle::Oracle;
use crate::oracles::TruthTable;
use crate::partition::{for_each_partition, Partition};

/// Largest `n` for which optimal partitions are found by enumeration.
pub const MAX_ENUMERATION_N: usize = 12;

/// Improvements smaller than this do not replace an earlier partition.
const TIE_TOLERANCE: f64 = 1e-12;

/// Tabulates a `Z_q` oracle on the uniform `Z_q^n` domain.
pub fn truth_table_of(oracle: &Oracle) -> Result<TruthTable> {
    let q = match oracle.codomain() {
        crate::domain::Codomain::Zq(q) => q,
        c => return Err(Error::CodomainMismatch(format!("expected a Z_q oracle, got {c:?}"))),
    };
    if !oracle.domain().is_uniform_zq(q) {
        return Err(Error::DomainMismatch("Hamming ground truth needs the uniform Z_q^n domain".into()));
    }
    match FiniteTable::from_oracle(oracle)?.values() {
        TableValues::Zq { residues, .. } => TruthTable::new(q, oracle.n(), residues.clone()),
        TableValues::Real(_) => unreachable!(),
    }
}

/// `E[(F - E[F|XZ] - E[F|YZ] + E[F|Z])^2]` with `Z` the remaining variables.
pub fn exact_pair_cost_sq_table(t: &FiniteTable, x: &[usize], y: &[usize]) -> Result<f64> {
    let n = t.n();
    let z: Vec<usize> = (0..n).filter(|v| !x.contains(v) && !y.contains(v)).collect();
    let xz: Vec<usize> = x.iter().chain(&z).copied().collect();
    let yz: Vec<usize> = y.iter().chain(&z).copied().collect();
    let f = t.real_values()?;
    let a = t.conditional_expectation(&xz)?;
    let b = t.conditional_expectation(&yz)?;
    let c = t.conditional_expectation(&z)?;
    let r: Vec<f64> = (0..f.len()).map(|i| f[i] - a[i] - b[i] + c[i]).collect();
    Ok(t.second_moment(&r))
}

/// `delta_{R,2}(P)^2 = E[(G - sum_i E[G | X_i])^2]` with `G = F - E[F]`.
pub fn exact_cost_sq_table(t: &FiniteTable, partition: &Partition) -> Result<f64> {
    if partition.n() != t.n() {
        return Err(Error::InvalidPartition(format!(
            "partition of {} variables for a table of {}",
            partition.n(),
            t.n()
        )));
    }
    let f = t.real_values()?;
    let mean = t.mean()?;
    let mut r: Vec<f64> = f.iter().map(|v| v - mean).collect();
    for b in partition.blocks() {
        let g = t.conditional_expectation(b)?;
        for (ri, gi) in r.iter_mut().zip(&g) {
            *ri -= gi - mean;
        }
    }
    Ok(t.second_moment(&r))
}

fn check_pair(n: usize, x: &[usize], y: &[usize]) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidSubset("X and Y must be nonempty".into()));
    }
    let mut seen = vec![false; n];
    for &v in x.iter().chain(y) {
        if v >= n || seen[v] {
            return Err(Error::InvalidSubset(format!("bad or repeated variable {v}")));
        }
        seen[v] = true;
    }
    Ok(())
}

/// `delta_{R,2}(P)` by full enumeration.
pub fn exact_delta_l2(oracle: &Oracle, partition: &Partition) -> Result<f64> {
    oracle.require_real()?;
    Ok(exact_cost_sq_table(&FiniteTable::from_oracle(oracle)?, partition)?.max(0.0).sqrt())
}

/// 2-norm cost of the generalized pair `(X, Y)`, `Z` the rest.
pub fn exact_pair_cost_l2(oracle: &Oracle, x: &[usize], y: &[usize]) -> Result<f64> {
    oracle.require_real()?;
    check_pair(oracle.n(), x, y)?;
    Ok(exact_pair_cost_sq_table(&FiniteTable::from_oracle(oracle)?, x, y)?.max(0.0).sqrt())
}

/// Cost of the generalized pair `(X, Y)` under `spec`. Exact costs exist
/// for the 2-norm on finite domains and for the Hamming metric on uniform
/// `Z_q^n`.
pub fn exact_pair_cost(oracle: &Oracle, x: &[usize], y: &[usize], spec: NormSpec) -> Result<f64> {
    match spec {
        NormSpec::RealP(p) if p == 2.0 => exact_pair_cost_l2(oracle, x, y),
        NormSpec::HammingZq => exact_pair_cost_hamming(&truth_table_of(oracle)?, x, y),
        NormSpec::RealP(p) => Err(Error::InvalidParameter(format!("no exact cost for the {p}-norm"))),
    }
}

/// `delta(P)` under `spec`, see [`exact_pair_cost`].
pub fn exact_partition_cost(oracle: &Oracle, partition: &Partition, spec: NormSpec) -> Result<f64> {
    match spec {
        NormSpec::RealP(p) if p == 2.0 => exact_delta_l2(oracle, partition),
        NormSpec::HammingZq => exact_partition_cost_hamming(&truth_table_of(oracle)?, partition),
        NormSpec::RealP(p) => Err(Error::InvalidParameter(format!("no exact cost for the {p}-norm"))),
    }
}

/// `||D_F(X, Y)||` by enumerating every `(X, X', Y, Y', Z)` tuple.
pub fn exact_dependence_norm(oracle: &Oracle, x: &[usize], y: &[usize], spec: NormSpec) -> Result<f64> {
    spec.check(oracle.codomain())?;
    check_pair(oracle.n(), x, y)?;
    let t = FiniteTable::from_oracle(oracle)?;
    let z: Vec<usize> = (0..t.n()).filter(|v| !x.contains(v) && !y.contains(v)).collect();
    let (px, py, pz) = (t.partial(x), t.partial(y), t.partial(&z));
    let work = (px.len() * px.len()) as u128 * (py.len() * py.len()) as u128 * pz.len() as u128;
    if work > MAX_POINTS * 4 {
        return Err(Error::TooLarge { what: "dependence enumeration", size: work, limit: MAX_POINTS * 4 });
    }
    let term = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        match t.values() {
            TableValues::Real(f) => (f[a] + f[b] - f[c] - f[d]).abs().powf(spec.p()),
            TableValues::Zq { q, residues: r } => {
                f64::from(u8::from((r[a] + r[b] + 2 * q - r[c] - r[d]) % q != 0))
            }
        }
    };
    let mut total = 0.0;
    for &(xa, wxa) in &px {
        for &(xb, wxb) in &px {
            for &(ya, wya) in &py {
                for &(yb, wyb) in &py {
                    let w = wxa * wxb * wya * wyb;
                    if w == 0.0 {
                        continue;
                    }
                    for &(zz, wz) in &pz {
                        total += w * wz * term(xa + ya + zz, xb + yb + zz, xb + ya + zz, xa + yb + zz);
                    }
                }
            }
        }
    }
    Ok(spec.finish(total))
}

/// Optimal `k`-partition of a hypergraph's vertices by cut cost, ties to the
/// smallest canonical label encoding. Returns the partition and its cost.
pub fn optimal_hypergraph_partition(h: &Hypergraph, k: usize) -> Result<(Partition, f64)> {
    check_k(h.n(), k)?;
    let mut best: Option<(Partition, f64)> = None;
    for_each_partition(h.n(), k, |p| {
        let masks: Vec<Mask> = p.blocks().iter().map(|b| mask_of(b)).collect();
        let c = h.cut_cost_masks(&masks);
        if best.as_ref().is_none_or(|(_, b)| c < b - TIE_TOLERANCE) {
            best = Some((p.clone(), c));
        }
    });
    Ok(best.expect("at least one partition"))
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} must be in 1..={n}")));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            what: "partition enumeration",
            size: n as u128,
            limit: MAX_ENUMERATION_N as u128,
        });
    }
    Ok(())
}

/// The best `k`-partition and `delta_k(F)` by exhaustive search.
///
/// The 2-norm uses the hypergraph of the Efron-Stein decomposition, the
/// Hamming metric the plurality reduction on the truth table.
pub fn exact_delta_k_opt(oracle: &Oracle, k: usize, spec: NormSpec) -> Result<(Partition, f64)> {
    check_k(oracle.n(), k)?;
    match spec {
        NormSpec::RealP(p) if p == 2.0 => {
            let h = Hypergraph::from_function(&efron_stein_decompose(oracle)?);
            let (p, c) = optimal_hypergraph_partition(&h, k)?;
            Ok((p, c.sqrt()))
        }
        NormSpec::HammingZq => {
            let t = truth_table_of(oracle)?;
            let mut best: Option<(Partition, f64)> = None;
            let mut err = None;
            for_each_partition(oracle.n(), k, |p| {
                if err.is_some() {
                    return;
                }
                match exact_partition_cost_hamming(&t, p) {
                    Ok(c) => {
                        if best.as_ref().is_none_or(|(_, b)| c < b - TIE_TOLERANCE) {
                            best = Some((p.clone(), c));
                        }
                    }
                    Err(e) => err = Some(e),
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(best.expect("at least one partition")),
            }
        }
        NormSpec::RealP(p) => Err(Error::InvalidParameter(format!("no exact cost for the {p}-norm"))),
    }
}
