//! Exact partition costs under the Hamming metric on uniform `Z_q^n`.
//!
//! For fixed summands on every block but one, the best summand on the
//! remaining block is the pointwise plurality of the residual, so only the
//! other blocks are enumerated. A constant can always be moved into the
//! plurality block, which lets every enumerated summand vanish at its first
//! point.

use crate::error::{Error, Result};
use crate::oracles::TruthTable;
use crate::partition::Partition;

/// Upper bound on enumerated summand combinations times table size.
pub const MAX_WORK: u128 = 1 << 32;

fn local_index(digits: &[usize], vars: &[usize], q: usize) -> usize {
    vars.iter().fold(0, |acc, &v| acc * q + digits[v])
}

/// `min Pr[F != F_1(X_1) + ... + F_k(X_k)]` over all block summands.
pub fn exact_partition_cost_hamming(table: &TruthTable, partition: &Partition) -> Result<f64> {
    let n = table.n();
    if partition.n() != n {
        return Err(Error::InvalidPartition(format!(
            "partition of {} variables for a table of {n}",
            partition.n()
        )));
    }
    let q = table.q() as usize;
    let size = table.entries().len();
    if partition.k() == 1 {
        return Ok(0.0);
    }

    let mut blocks: Vec<&Vec<usize>> = partition.blocks().iter().collect();
    let largest = (0..blocks.len()).max_by_key(|&i| (blocks[i].len(), usize::MAX - i)).unwrap();
    let last = blocks.remove(largest);

    let table_sizes: Vec<usize> = blocks.iter().map(|b| q.pow(b.len() as u32)).collect();
    let free_digits: usize = table_sizes.iter().map(|s| s - 1).sum();
    let candidates = (q as u128).checked_pow(free_digits as u32).unwrap_or(u128::MAX);
    let work = candidates.saturating_mul(size as u128);
    if work > MAX_WORK {
        return Err(Error::TooLarge { what: "Hamming enumeration", size: work, limit: MAX_WORK });
    }

    let mut digits = vec![0usize; n];
    let mut locs: Vec<Vec<usize>> = vec![Vec::with_capacity(size); blocks.len()];
    let mut last_loc = Vec::with_capacity(size);
    for idx in 0..size {
        crate::oracles::decode_index(idx, q, &mut digits);
        for (b, l) in blocks.iter().zip(locs.iter_mut()) {
            l.push(local_index(&digits, b, q));
        }
        last_loc.push(local_index(&digits, last, q));
    }

    let last_size = q.pow(last.len() as u32);
    let mut summands: Vec<Vec<usize>> = table_sizes.iter().map(|&s| vec![0; s]).collect();
    let mut counts = vec![0u32; last_size * q];
    let mut best = usize::MAX;
    let entries = table.entries();
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        for p in 0..size {
            let mut r = entries[p] as usize;
            for (s, l) in summands.iter().zip(&locs) {
                r += q - s[l[p]];
            }
            counts[last_loc[p] * q + r % q] += 1;
        }
        let kept: usize = counts.chunks(q).map(|c| *c.iter().max().unwrap() as usize).sum();
        best = best.min(size - kept);
        if best == 0 || !next_candidate(&mut summands, q) {
            break;
        }
    }
    Ok(best as f64 / size as f64)
}

/// Odometer over all summand tables with entry 0 pinned to 0.
fn next_candidate(summands: &mut [Vec<usize>], q: usize) -> bool {
    for s in summands.iter_mut().rev() {
        for e in s.iter_mut().skip(1).rev() {
            *e += 1;
            if *e < q {
                return true;
            }
            *e = 0;
        }
    }
    false
}

/// `delta(X, Y)` for a bipartition `Y = complement of X`.
pub fn exact_delta_hamming(table: &TruthTable, x: &[usize], y: &[usize]) -> Result<f64> {
    let n = table.n();
    let mut all: Vec<usize> = x.iter().chain(y).copied().collect();
    all.sort_unstable();
    if all != (0..n).collect::<Vec<_>>() {
        return Err(Error::InvalidSubset("X and Y must partition the variables".into()));
    }
    exact_partition_cost_hamming(table, &Partition::new(n, vec![x.to_vec(), y.to_vec()])?)
}

/// Cost of the generalized pair `(X, Y)` with `Z` the remaining variables:
/// `min Pr[F != F_1(X, Z) + F_2(Y, Z)]`, the average over `Z` of the cost
/// of each slice.
pub fn exact_pair_cost_hamming(table: &TruthTable, x: &[usize], y: &[usize]) -> Result<f64> {
    let n = table.n();
    let mut role = vec![0u8; n];
    for (set, tag) in [(x, 1u8), (y, 2u8)] {
        for &v in set {
            if v >= n || role[v] != 0 {
                return Err(Error::InvalidSubset(format!("bad or repeated variable {v}")));
            }
            role[v] = tag;
        }
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidSubset("X and Y must be nonempty".into()));
    }
    let q = table.q() as usize;
    let z: Vec<usize> = (0..n).filter(|&v| role[v] == 0).collect();
    let xy: Vec<usize> = (0..n).filter(|&v| role[v] != 0).collect();
    let local = Partition::from_labels(&xy.iter().map(|&v| role[v] as usize).collect::<Vec<_>>())?;
    let slices = q.pow(z.len() as u32);
    let mut digits = vec![0usize; n];
    let mut zd = vec![0usize; z.len()];
    let mut total = 0.0;
    for zi in 0..slices {
        crate::oracles::decode_index(zi, q, &mut zd);
        for (&v, &d) in z.iter().zip(&zd) {
            digits[v] = d;
        }
        let slice = TruthTable::from_fn(table.q(), xy.len(), |sub| {
            for (&v, &d) in xy.iter().zip(sub) {
                digits[v] = d;
            }
            table.get(&digits)
        })?;
        total += exact_partition_cost_hamming(&slice, &local)?;
    }
    Ok(total / slices as f64)
}
