//! Efron-Stein decomposition of a function on a finite product space.
//!
//! Each variable gets an orthonormal basis of its function space (under its
//! marginal) whose first element is the constant 1. The coefficient tensor
//! of `F` in the product basis is obtained one axis at a time; the
//! component `F_S` collects the basis products that are non-constant on
//! exactly the variables of `S`. On the uniform `{-1, +1}` cube the basis is
//! `{1, x}` and the tensor is the Walsh-Hadamard transform.

use std::collections::BTreeMap;

use super::table::FiniteTable;
use crate::error::{Error, Result};
use crate::oracle::Oracle;

/// Bitmask of a variable subset, bit `i` for variable `i`.
pub type Mask = u64;

pub fn mask_of(vars: &[usize]) -> Mask {
    vars.iter().fold(0, |m, &v| m | (1 << v))
}

pub fn vars_of(mask: Mask) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

#[derive(Debug, Clone)]
pub struct EfronSteinTable {
    n: usize,
    radices: Vec<usize>,
    /// Per variable, row `j` is basis function `j` on the symbols.
    bases: Vec<Vec<Vec<f64>>>,
    coeffs: Vec<f64>,
    weights: BTreeMap<Mask, f64>,
}

/// Coefficients whose square is below this are treated as zero.
const ZERO_WEIGHT: f64 = 1e-24;

impl EfronSteinTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `||F_S||^2`, the squared coefficient of `S`.
    pub fn weight(&self, vars: &[usize]) -> f64 {
        self.weights.get(&mask_of(vars)).copied().unwrap_or(0.0)
    }

    /// `F^_S`. Signed when every variable of `S` has a two-symbol alphabet
    /// (the Fourier coefficient on the cube), otherwise `||F_S||`.
    pub fn coefficient(&self, vars: &[usize]) -> f64 {
        if vars.iter().all(|&v| self.radices[v] == 2) {
            let idx = self.index_with_digit_one(vars);
            self.coeffs[idx]
        } else {
            self.weight(vars).sqrt()
        }
    }

    fn index_with_digit_one(&self, vars: &[usize]) -> usize {
        let strides = super::table::strides_of(&self.radices);
        vars.iter().map(|&v| strides[v]).sum()
    }

    /// Nonzero components as `(S, ||F_S||^2)`, ordered by bitmask.
    pub fn components(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.weights.iter().map(|(&m, &w)| (vars_of(m), w))
    }

    pub fn masks(&self) -> &BTreeMap<Mask, f64> {
        &self.weights
    }

    /// Parseval total `sum_S ||F_S||^2 = E[F^2]`.
    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    /// The component `F_S` tabulated over the domain.
    pub fn component(&self, vars: &[usize]) -> Vec<f64> {
        let target = mask_of(vars);
        let mut c = self.coeffs.clone();
        let strides = super::table::strides_of(&self.radices);
        for (idx, v) in c.iter_mut().enumerate() {
            if support_mask(idx, &self.radices, &strides) != target {
                *v = 0.0;
            }
        }
        for i in 0..self.n {
            let r = self.radices[i];
            let mut m = vec![vec![0.0; r]; r];
            for (s, row) in m.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = self.bases[i][j][s];
                }
            }
            apply_axis(&mut c, &self.radices, i, &m);
        }
        c
    }
}

fn support_mask(mut idx: usize, radices: &[usize], strides: &[usize]) -> Mask {
    let mut m = 0;
    for i in 0..radices.len() {
        let d = idx / strides[i];
        idx %= strides[i];
        if d != 0 {
            m |= 1 << i;
        }
    }
    m
}

/// Replaces the axis-`i` fibres `v` of `data` by `m v`.
fn apply_axis(data: &mut [f64], radices: &[usize], axis: usize, m: &[Vec<f64>]) {
    let r = radices[axis];
    let inner: usize = radices[axis + 1..].iter().product();
    let outer: usize = radices[..axis].iter().product();
    let mut fibre = vec![0.0; r];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * r * inner + i;
            for (s, f) in fibre.iter_mut().enumerate() {
                *f = data[base + s * inner];
            }
            for (j, row) in m.iter().enumerate() {
                data[base + j * inner] = row.iter().zip(&fibre).map(|(a, b)| a * b).sum();
            }
        }
    }
}

/// Orthonormal basis under `w`: the constant function, then Gram-Schmidt on
/// the indicators of symbols `1..r`. Rows beyond the rank are zero.
fn basis(w: &[f64]) -> Vec<Vec<f64>> {
    let r = w.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(w).map(|((x, y), p)| x * y * p).sum::<f64>();
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0; r]];
    for s in 1..r {
        if rows.len() == r {
            break;
        }
        let mut v = vec![0.0; r];
        v[s] = 1.0;
        for b in &rows {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 {
            rows.push(v.iter().map(|x| x / norm).collect());
        }
    }
    while rows.len() < r {
        rows.push(vec![0.0; r]);
    }
    rows
}

fn walsh_hadamard(data: &mut [f64]) {
    let mut h = 1;
    while h < data.len() {
        for i in (0..data.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (data[j], data[j + h]);
                data[j] = a + b;
                data[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn is_pm1_table(t: &FiniteTable) -> bool {
    t.symbols().iter().all(|s| s.as_slice() == [-1.0, 1.0])
        && t.marginals().iter().all(|m| m.iter().all(|&w| w == 0.5))
}

pub(crate) fn decompose_table(t: &FiniteTable, fast: bool) -> Result<EfronSteinTable> {
    let f = t.real_values()?;
    let n = t.n();
    if n > 64 {
        return Err(Error::TooLarge { what: "variable count", size: n as u128, limit: 64 });
    }
    let radices = t.radices().to_vec();
    let bases: Vec<Vec<Vec<f64>>> = t.marginals().iter().map(|w| basis(w)).collect();
    let mut coeffs = f.to_vec();
    if fast && is_pm1_table(t) {
        walsh_hadamard(&mut coeffs);
        let scale = 1.0 / coeffs.len() as f64;
        for (idx, c) in coeffs.iter_mut().enumerate() {
            let sign = if idx.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            *c *= sign * scale;
        }
    } else {
        for i in 0..n {
            let m: Vec<Vec<f64>> = bases[i]
                .iter()
                .map(|row| row.iter().zip(&t.marginals()[i]).map(|(b, w)| b * w).collect())
                .collect();
            apply_axis(&mut coeffs, &radices, i, &m);
        }
    }
    let strides = super::table::strides_of(&radices);
    let mut weights = BTreeMap::new();
    for (idx, &c) in coeffs.iter().enumerate() {
        if c * c > 0.0 {
            *weights.entry(support_mask(idx, &radices, &strides)).or_insert(0.0) += c * c;
        }
    }
    weights.retain(|_, w| *w > ZERO_WEIGHT);
    Ok(EfronSteinTable { n, radices, bases, coeffs, weights })
}

/// Exact decomposition by full enumeration of the oracle's finite domain.
pub fn efron_stein_decompose(oracle: &Oracle) -> Result<EfronSteinTable> {
    oracle.require_real()?;
    decompose_table(&FiniteTable::from_oracle(oracle)?, true)
}
