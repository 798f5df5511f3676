//! Built-in oracle families: planted additive functions, truth tables,
//! quadratic forms and the far-from-partitionable hard instances.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::domain::{mix_words, Alphabet, Codomain, Domain};
use crate::error::{Error, Result};
use crate::oracle::{Evaluator, Oracle, RealFn, ZqFn};
use crate::partition::Partition;

/// Dense table of a `Z_q`-valued function of `n` variables in mixed-radix
/// order, variable 0 most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    q: u64,
    n: usize,
    entries: Vec<u64>,
}

/// Largest table we are willing to materialize.
pub const MAX_TABLE_ENTRIES: u128 = 1 << 24;

impl TruthTable {
    pub fn new(q: u64, n: usize, entries: Vec<u64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("modulus {q} < 2")));
        }
        let size = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > MAX_TABLE_ENTRIES {
            return Err(Error::TooLarge { what: "truth table", size, limit: MAX_TABLE_ENTRIES });
        }
        if entries.len() as u128 != size {
            return Err(Error::InvalidParameter(format!(
                "truth table needs {size} entries, got {}",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| e >= q) {
            return Err(Error::InvalidParameter(format!("residue {bad} not in [0, {q})")));
        }
        Ok(TruthTable { q, n, entries })
    }

    /// Tabulates `f` over all points of `Z_q^n`.
    pub fn from_fn<F: FnMut(&[usize]) -> u64>(q: u64, n: usize, mut f: F) -> Result<Self> {
        let size = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > MAX_TABLE_ENTRIES {
            return Err(Error::TooLarge { what: "truth table", size, limit: MAX_TABLE_ENTRIES });
        }
        let mut digits = vec![0usize; n];
        let mut entries = Vec::with_capacity(size as usize);
        for idx in 0..size as usize {
            decode_index(idx, q as usize, &mut digits);
            entries.push(f(&digits) % q);
        }
        TruthTable::new(q, n, entries)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0usize, |acc, &d| acc * self.q as usize + d)
    }

    pub fn get(&self, digits: &[usize]) -> u64 {
        self.entries[self.index_of(digits)]
    }

    /// Text form: `zq <q> <n>` followed by the residues.
    pub fn to_text(&self) -> String {
        let mut s = format!("zq {} {}\n", self.q, self.n);
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                s.push(if i % 32 == 0 { '\n' } else { ' ' });
            }
            let _ = write!(s, "{e}");
        }
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, message: "empty truth-table file".into() })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "zq" {
            return Err(Error::Parse { line: hline + 1, message: "expected `zq <q> <n>`".into() });
        }
        let q = parse_tok::<u64>(toks[1], hline)?;
        let n = parse_tok::<usize>(toks[2], hline)?;
        let mut entries = Vec::new();
        for (ln, line) in lines {
            for tok in line.split_whitespace() {
                entries.push(parse_tok::<u64>(tok, ln)?);
            }
        }
        TruthTable::new(q, n, entries)
    }
}

pub(crate) fn decode_index(mut idx: usize, radix: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = idx % radix;
        idx /= radix;
    }
}

fn parse_tok<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    tok.parse::<T>()
        .map_err(|e| Error::Parse { line: line + 1, message: format!("{tok:?}: {e}") })
}

/// Indexes the table by the symbol positions of a uniform `Z_q^n` domain.
pub fn truth_table_oracle(table: &TruthTable, domain: &Domain) -> Result<Oracle> {
    if domain.n() != table.n || !domain.is_uniform_zq(table.q) {
        return Err(Error::DomainMismatch(format!(
            "truth table over Z_{}^{} needs the uniform domain of that shape",
            table.q, table.n
        )));
    }
    let q = table.q as usize;
    let entries: Arc<[u64]> = table.entries.clone().into();
    Oracle::zq(domain.clone(), table.q, move |a| {
        let idx = a.iter().fold(0usize, |acc, &v| acc * q + v as usize);
        entries[idx]
    })
}

pub fn random_truth_table<R: Rng + ?Sized>(q: u64, n: usize, rng: &mut R) -> Result<TruthTable> {
    TruthTable::from_fn(q, n, |_| rng.gen_range(0..q))
}

/// Random exactly decomposable table: a sum of random per-block functions.
pub fn random_additive_table<R: Rng + ?Sized>(
    q: u64,
    partition: &Partition,
    rng: &mut R,
) -> Result<TruthTable> {
    let qs = q as usize;
    let parts: Vec<Vec<u64>> = partition
        .blocks()
        .iter()
        .map(|b| (0..qs.pow(b.len() as u32)).map(|_| rng.gen_range(0..q)).collect())
        .collect();
    TruthTable::from_fn(q, partition.n(), |digits| {
        partition
            .blocks()
            .iter()
            .zip(&parts)
            .map(|(b, tab)| tab[b.iter().fold(0usize, |acc, &v| acc * qs + digits[v])])
            .sum::<u64>()
    })
}

/// A per-block summand of an additive oracle; it receives the block's
/// coordinates in ascending variable order.
#[derive(Clone)]
pub enum BlockFunction {
    Zq { q: u64, f: ZqFn },
    Real(RealFn),
}

impl BlockFunction {
    pub fn real<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        BlockFunction::Real(Arc::new(f))
    }

    pub fn zq<F: Fn(&[f64]) -> u64 + Send + Sync + 'static>(q: u64, f: F) -> Self {
        BlockFunction::Zq { q, f: Arc::new(f) }
    }

    fn codomain(&self) -> Codomain {
        match self {
            BlockFunction::Zq { q, .. } => Codomain::Zq(*q),
            BlockFunction::Real(_) => Codomain::Real,
        }
    }
}

/// `F(V) = F_1(X_1) + ... + F_k(X_k)` for the given blocks.
pub fn additive_oracle(
    domain: &Domain,
    blocks: &Partition,
    block_functions: Vec<BlockFunction>,
) -> Result<Oracle> {
    if blocks.n() != domain.n() {
        return Err(Error::InvalidPartition(format!(
            "partition of {} variables for a domain of {}",
            blocks.n(),
            domain.n()
        )));
    }
    if block_functions.len() != blocks.k() {
        return Err(Error::InvalidParameter(format!(
            "{} blocks but {} block functions",
            blocks.k(),
            block_functions.len()
        )));
    }
    let codomain = block_functions[0].codomain();
    if block_functions.iter().any(|b| b.codomain() != codomain) {
        return Err(Error::CodomainMismatch("block functions disagree on the codomain".into()));
    }
    let index: Arc<Vec<Vec<usize>>> = Arc::new(blocks.blocks().to_vec());
    let width = index.iter().map(Vec::len).max().unwrap_or(0);
    match codomain {
        Codomain::Real => {
            let fs: Vec<RealFn> = block_functions
                .into_iter()
                .map(|b| match b {
                    BlockFunction::Real(f) => f,
                    BlockFunction::Zq { .. } => unreachable!(),
                })
                .collect();
            Ok(Oracle::real(domain.clone(), move |a| {
                let mut buf = Vec::with_capacity(width);
                let mut total = 0.0;
                for (b, f) in index.iter().zip(&fs) {
                    buf.clear();
                    buf.extend(b.iter().map(|&v| a[v]));
                    total += f(&buf);
                }
                total
            }))
        }
        Codomain::Zq(q) => {
            let fs: Vec<ZqFn> = block_functions
                .into_iter()
                .map(|b| match b {
                    BlockFunction::Zq { f, .. } => f,
                    BlockFunction::Real(_) => unreachable!(),
                })
                .collect();
            Oracle::zq(domain.clone(), q, move |a| {
                let mut buf = Vec::with_capacity(width);
                let mut total = 0u64;
                for (b, f) in index.iter().zip(&fs) {
                    buf.clear();
                    buf.extend(b.iter().map(|&v| a[v]));
                    total = (total + f(&buf) % q) % q;
                }
                total
            })
        }
    }
}

/// Output-side noise for "almost decomposable" fixtures. The noise is a
/// fixed pseudo-random function of the queried point, so the perturbed
/// oracle is still a function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// With probability `prob`, add a uniformly random nonzero residue.
    Flip { prob: f64 },
    /// Add a value uniform in `[-bound, bound]`.
    Additive { bound: f64 },
}

fn point_hash(seed: u64, a: &[f64]) -> u64 {
    mix_words(std::iter::once(seed).chain(a.iter().map(|v| v.to_bits())))
}

fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

pub fn perturbed_oracle(base: Oracle, noise: Noise, seed: u64) -> Result<Oracle> {
    let domain = base.domain().clone();
    match (base.evaluator().clone(), noise) {
        (Evaluator::Zq { q, f }, Noise::Flip { prob }) => {
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::InvalidParameter(format!("flip probability {prob}")));
            }
            Oracle::zq(domain, q, move |a| {
                let h = point_hash(seed, a);
                let v = f(a) % q;
                if unit_from_hash(h) < prob {
                    let shift = 1 + mix_words([h, 1]) % (q - 1);
                    (v + shift) % q
                } else {
                    v
                }
            })
        }
        (Evaluator::Real(f), Noise::Additive { bound }) => {
            if !(bound.is_finite() && bound >= 0.0) {
                return Err(Error::InvalidParameter(format!("noise bound {bound}")));
            }
            Ok(Oracle::real(domain, move |a| {
                let u = unit_from_hash(point_hash(seed, a));
                f(a) + bound * (2.0 * u - 1.0)
            }))
        }
        (ev, n) => Err(Error::CodomainMismatch(format!(
            "noise {n:?} does not apply to codomain {:?}",
            ev.codomain()
        ))),
    }
}

/// `scale * a^T H a` with `H` symmetric and zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    n: usize,
    h: Vec<f64>,
    scale: f64,
}

impl QuadraticForm {
    /// `h` is row-major `n x n`.
    pub fn new(n: usize, h: Vec<f64>, scale: f64) -> Result<Self> {
        if h.len() != n * n {
            return Err(Error::InvalidParameter(format!("matrix needs {} entries", n * n)));
        }
        if !scale.is_finite() || h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("quadratic form entries must be finite".into()));
        }
        for i in 0..n {
            if h[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..i {
                if (h[i * n + j] - h[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(QuadraticForm { n, h, scale })
    }

    pub fn zero(n: usize) -> Self {
        QuadraticForm { n, h: vec![0.0; n * n], scale: 1.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.n + j]
    }

    /// `(j, k, 2 * scale * H_jk)` for `j < k` with `H_jk != 0`: the
    /// coefficient of `x_j x_k` in the expanded form.
    pub fn pair_coefficients(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for k in j + 1..self.n {
                let v = self.entry(j, k);
                if v != 0.0 {
                    out.push((j, k, 2.0 * self.scale * v));
                }
            }
        }
        out
    }

    pub fn eval(&self, a: &[f64]) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n {
            let row = &self.h[j * self.n..(j + 1) * self.n];
            let dot: f64 = row.iter().zip(a).map(|(h, x)| h * x).sum();
            total += a[j] * dot;
        }
        self.scale * total
    }

    /// Text form: `quad <n> <scale>` then `n` rows of `n` reals.
    pub fn to_text(&self) -> String {
        let mut s = format!("quad {} {:?}\n", self.n, self.scale);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:?}", self.entry(i, j))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, message: "empty quadratic-form file".into() })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "quad" {
            return Err(Error::Parse { line: hline + 1, message: "expected `quad <n> <scale>`".into() });
        }
        let n = parse_tok::<usize>(toks[1], hline)?;
        let scale = parse_tok::<f64>(toks[2], hline)?;
        let mut h = Vec::with_capacity(n * n);
        for (ln, line) in lines {
            let row: Vec<f64> =
                line.split_whitespace().map(|t| parse_tok::<f64>(t, ln)).collect::<Result<_>>()?;
            if row.len() != n {
                return Err(Error::Parse { line: ln + 1, message: format!("expected {n} entries") });
            }
            h.extend(row);
        }
        if h.len() != n * n {
            return Err(Error::Parse { line: 0, message: format!("expected {n} rows") });
        }
        QuadraticForm::new(n, h, scale)
    }
}

pub fn quadratic_oracle(form: &QuadraticForm, domain: &Domain) -> Result<Oracle> {
    if domain.n() != form.n {
        return Err(Error::DomainMismatch(format!(
            "form has {} variables, domain {}",
            form.n,
            domain.n()
        )));
    }
    let ok = domain
        .alphabets()
        .iter()
        .all(|a| matches!(a, Alphabet::Rademacher | Alphabet::Gaussian));
    if !ok {
        return Err(Error::DomainMismatch("quadratic oracles need Rademacher or Gaussian variables".into()));
    }
    let terms: Arc<[(usize, usize, f64)]> = form.pair_coefficients().into();
    Ok(Oracle::real(domain.clone(), move |a| {
        terms.iter().map(|&(j, k, w)| w * a[j] * a[k]).sum()
    }))
}

/// Random dense quadratic form: `H_jk ~ N(0, 1)` independently for `j < k`
/// with probability `density` (zero otherwise), `scale = 1/(2n)`.
pub fn random_quadratic_form<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> QuadraticForm {
    let mut h = vec![0.0; n * n];
    for j in 0..n {
        for k in j + 1..n {
            if rng.gen::<f64>() < density {
                let z = Alphabet::Gaussian.sample(rng);
                h[j * n + k] = z;
                h[k * n + j] = z;
            }
        }
    }
    QuadraticForm { n, h, scale: 1.0 / (2.0 * n as f64) }
}

/// Random form supported only on pairs inside one block of `blocks`.
pub fn block_quadratic_form<R: Rng + ?Sized>(blocks: &Partition, rng: &mut R) -> QuadraticForm {
    let n = blocks.n();
    let labels = blocks.labels();
    let mut h = vec![0.0; n * n];
    for j in 0..n {
        for k in j + 1..n {
            if labels[j] == labels[k] {
                let z = Alphabet::Gaussian.sample(rng);
                h[j * n + k] = z;
                h[k * n + j] = z;
            }
        }
    }
    QuadraticForm { n, h, scale: 1.0 / (2.0 * n as f64) }
}

/// `F(x) = n^-1 sum_{j != k} Z_jk x_j x_k` on the Rademacher cube with
/// independent standard normal `Z_jk`, drawn once.
///
/// Returned as the symmetric form `H_jk = (Z_jk + Z_kj) / 2`, `scale = 1/n`.
pub fn gaussian_quadratic_far_oracle<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<(Oracle, QuadraticForm)> {
    if n < 2 {
        return Err(Error::InvalidParameter("the far quadratic family needs n >= 2".into()));
    }
    let mut z = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            if j != k {
                z[j * n + k] = Alphabet::Gaussian.sample(rng);
            }
        }
    }
    let mut h = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            if j != k {
                h[j * n + k] = 0.5 * (z[j * n + k] + z[k * n + j]);
            }
        }
    }
    let form = QuadraticForm { n, h, scale: 1.0 / n as f64 };
    let oracle = quadratic_oracle(&form, &Domain::rademacher(n)?)?;
    Ok((oracle, form))
}

/// Uniformly random function of all coordinates but a hidden one, over the
/// uniform `Z_q^n` domain. Returns the oracle and the hidden coordinate.
///
/// Values are derived from a keyed hash of the visible coordinates and
/// memoized on first use, so repeated queries always agree.
pub fn hidden_junta_oracle<R: Rng + ?Sized>(n: usize, q: u64, rng: &mut R) -> Result<(Oracle, usize)> {
    if n < 2 || q < 2 {
        return Err(Error::InvalidParameter("hidden junta needs n >= 2 and q >= 2".into()));
    }
    let hidden = rng.gen_range(0..n);
    let key_seed: u64 = rng.gen();
    let memo: Arc<Mutex<HashMap<Vec<u64>, u64>>> = Arc::new(Mutex::new(HashMap::new()));
    let domain = Domain::uniform_zq(n, q)?;
    let oracle = Oracle::zq(domain, q, move |a| {
        let key: Vec<u64> =
            a.iter().enumerate().filter(|&(i, _)| i != hidden).map(|(_, v)| *v as u64).collect();
        let mut memo = memo.lock().expect("junta memo poisoned");
        *memo
            .entry(key)
            .or_insert_with_key(|k| mix_words(std::iter::once(key_seed).chain(k.iter().copied())) % q)
    })?;
    Ok((oracle, hidden))
}

/// `F(x) = sum_S c_S prod_{i in S} x_i` on the `{-1, +1}` cube.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSparse {
    pub n: usize,
    pub terms: Vec<(Vec<usize>, f64)>,
}

impl FourierSparse {
    pub fn eval(&self, a: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| c * s.iter().map(|&i| a[i]).product::<f64>())
            .sum()
    }

    pub fn oracle(&self) -> Result<Oracle> {
        let f = self.clone();
        Ok(Oracle::real(Domain::rademacher(self.n)?, move |a| f.eval(a)))
    }
}

/// `terms` distinct random subsets of size `1..=max_degree` with
/// coefficients uniform in `[-1, 1]`.
pub fn random_fourier_sparse<R: Rng + ?Sized>(
    n: usize,
    terms: usize,
    max_degree: usize,
    rng: &mut R,
) -> FourierSparse {
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    let max_degree = max_degree.clamp(1, n);
    let mut attempts = 0;
    while chosen.len() < terms && attempts < 100 * terms + 100 {
        attempts += 1;
        let d = rng.gen_range(1..=max_degree);
        let mut s: Vec<usize> = rand::seq::index::sample(rng, n, d).into_vec();
        s.sort_unstable();
        if !chosen.contains(&s) {
            chosen.push(s);
        }
    }
    FourierSparse {
        n,
        terms: chosen.into_iter().map(|s| (s, rng.gen_range(-1.0..=1.0))).collect(),
    }
}
