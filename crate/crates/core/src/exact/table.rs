use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::oracle::{Evaluator, Oracle};

/// Largest number of points enumerated by the exact routines.
pub const MAX_POINTS: u128 = 1 << 24;

/// Function values of a finite-domain oracle at every point, in mixed-radix
/// order with variable 0 most significant.
#[derive(Debug, Clone)]
pub enum TableValues {
    Real(Vec<f64>),
    Zq { q: u64, residues: Vec<u64> },
}

/// An oracle tabulated over its whole (finite) domain together with the
/// product measure.
#[derive(Debug, Clone)]
pub struct FiniteTable {
    radices: Vec<usize>,
    strides: Vec<usize>,
    symbols: Vec<Vec<f64>>,
    marginals: Vec<Vec<f64>>,
    uniform: bool,
    values: TableValues,
}

/// Digit assignments to a subset of variables: `(index contribution, probability)`.
pub(crate) type Partial = Vec<(usize, f64)>;

impl FiniteTable {
    /// Evaluates the oracle at every point of its domain. Each point costs
    /// one counted query.
    pub fn from_oracle(oracle: &Oracle) -> Result<Self> {
        let d = oracle.domain();
        let (radices, symbols, marginals) = layout(d)?;
        let n = radices.len();
        let size: usize = radices.iter().product();
        let mut digits = vec![0usize; n];
        let mut point: Vec<f64> = symbols.iter().map(|s| s[0]).collect();
        let values = match oracle.evaluator() {
            Evaluator::Real(_) => {
                let mut v = Vec::with_capacity(size);
                for _ in 0..size {
                    v.push(oracle.query_real(&point)?);
                    advance(&mut digits, &mut point, &radices, &symbols);
                }
                TableValues::Real(v)
            }
            Evaluator::Zq { q, .. } => {
                let mut v = Vec::with_capacity(size);
                for _ in 0..size {
                    match oracle.query(&point)? {
                        crate::domain::GroupValue::Zq { residue, .. } => v.push(residue),
                        crate::domain::GroupValue::Real(_) => unreachable!(),
                    }
                    advance(&mut digits, &mut point, &radices, &symbols);
                }
                TableValues::Zq { q: *q, residues: v }
            }
        };
        let uniform = marginals
            .iter()
            .all(|m| m.iter().all(|w| (w - 1.0 / m.len() as f64).abs() <= 1e-15));
        let strides = strides_of(&radices);
        Ok(FiniteTable { radices, strides, symbols, marginals, uniform, values })
    }

    pub fn n(&self) -> usize {
        self.radices.len()
    }

    pub fn len(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn marginals(&self) -> &[Vec<f64>] {
        &self.marginals
    }

    pub fn symbols(&self) -> &[Vec<f64>] {
        &self.symbols
    }

    pub fn values(&self) -> &TableValues {
        &self.values
    }

    pub fn real_values(&self) -> Result<&[f64]> {
        match &self.values {
            TableValues::Real(v) => Ok(v),
            TableValues::Zq { .. } => Err(Error::CodomainMismatch("expected a real oracle".into())),
        }
    }

    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for i in (0..self.n()).rev() {
            out[i] = self.symbols[i][idx % self.radices[i]];
            idx /= self.radices[i];
        }
        out
    }

    /// Probability of every point.
    pub fn weights(&self) -> Vec<f64> {
        if self.uniform {
            return vec![1.0 / self.len() as f64; self.len()];
        }
        let all: Vec<usize> = (0..self.n()).collect();
        let mut w = vec![0.0; self.len()];
        for (idx, p) in self.partial(&all) {
            w[idx] = p;
        }
        w
    }

    /// Every assignment to `vars` as an index contribution and probability.
    pub(crate) fn partial(&self, vars: &[usize]) -> Partial {
        let mut out = vec![(0usize, 1.0f64)];
        for &v in vars {
            let mut next = Vec::with_capacity(out.len() * self.radices[v]);
            for &(idx, p) in &out {
                for (s, &w) in self.marginals[v].iter().enumerate() {
                    next.push((idx + s * self.strides[v], p * w));
                }
            }
            out = next;
        }
        out
    }

    /// `E[F | vars]` evaluated at every point.
    pub fn conditional_expectation(&self, vars: &[usize]) -> Result<Vec<f64>> {
        let f = self.real_values()?;
        let rest: Vec<usize> = (0..self.n()).filter(|v| !vars.contains(v)).collect();
        let fixed = self.partial(vars);
        let free = self.partial(&rest);
        let mut out = vec![0.0; self.len()];
        for &(base, _) in &fixed {
            let mut e = 0.0;
            let mut mass = 0.0;
            for &(off, p) in &free {
                e += p * f[base + off];
                mass += p;
            }
            let e = if mass > 0.0 { e / mass } else { 0.0 };
            for &(off, _) in &free {
                out[base + off] = e;
            }
        }
        Ok(out)
    }

    /// `E[g^2]` for a function tabulated in the same order.
    pub fn second_moment(&self, g: &[f64]) -> f64 {
        if self.uniform {
            return g.iter().map(|x| x * x).sum::<f64>() / g.len() as f64;
        }
        self.weights().iter().zip(g).map(|(w, x)| w * x * x).sum()
    }

    pub fn mean(&self) -> Result<f64> {
        let f = self.real_values()?;
        if self.uniform {
            return Ok(f.iter().sum::<f64>() / f.len() as f64);
        }
        Ok(self.weights().iter().zip(f).map(|(w, x)| w * x).sum())
    }
}

fn layout(d: &Domain) -> Result<(Vec<usize>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let count = d
        .point_count()
        .ok_or_else(|| Error::InvalidDomain("exact computation needs a finite domain".into()))?;
    if count > MAX_POINTS {
        return Err(Error::TooLarge { what: "domain", size: count, limit: MAX_POINTS });
    }
    let mut radices = Vec::with_capacity(d.n());
    let mut symbols = Vec::with_capacity(d.n());
    let mut marginals = Vec::with_capacity(d.n());
    for a in d.alphabets() {
        let support = a.support().expect("finite alphabet");
        radices.push(support.len());
        symbols.push(support.iter().map(|s| s.0).collect());
        marginals.push(support.iter().map(|s| s.1).collect());
    }
    Ok((radices, symbols, marginals))
}

pub(crate) fn strides_of(radices: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; radices.len()];
    for i in (0..radices.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * radices[i + 1];
    }
    strides
}

fn advance(digits: &mut [usize], point: &mut [f64], radices: &[usize], symbols: &[Vec<f64>]) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            point[i] = symbols[i][digits[i]];
            return;
        }
        digits[i] = 0;
        point[i] = symbols[i][0];
    }
}
