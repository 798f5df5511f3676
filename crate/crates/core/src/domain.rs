//! Variable domains, product measures, assignments and group values.
//!
//! Every variable carries its own alphabet. Finite alphabets hold explicit
//! symbols (stored as `f64`, so `Z_q` domains use the symbols `0..q`) with a
//! probability vector; Rademacher variables are uniform on `{-1, +1}`;
//! Gaussian variables are standard normal. The product of the per-variable
//! measures is the measure all norms and estimators refer to.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a finite alphabet.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Per-variable alphabet together with its marginal measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Alphabet {
    /// Explicit symbols with probabilities.
    Finite { values: Vec<f64>, weights: Vec<f64> },
    /// Standard normal.
    Gaussian,
    /// Uniform on `{-1, +1}`.
    Rademacher,
}

impl Alphabet {
    pub fn finite(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDomain("finite alphabet needs at least one symbol".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidDomain(format!(
                "{} symbols but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("symbols must be finite reals".into()));
        }
        for (i, a) in values.iter().enumerate() {
            if values[..i].contains(a) {
                return Err(Error::InvalidDomain(format!("duplicate symbol {a}")));
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidDomain("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDomain(format!("weights sum to {total}, not 1")));
        }
        Ok(Alphabet::Finite { values, weights })
    }

    /// Uniform measure over the given symbols.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let w = 1.0 / values.len().max(1) as f64;
        let weights = vec![w; values.len()];
        Self::finite(values, weights)
    }

    /// Symbols with their probabilities, or `None` for continuous alphabets.
    pub fn support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Alphabet::Finite { values, weights } => {
                Some(values.iter().copied().zip(weights.iter().copied()).collect())
            }
            Alphabet::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            Alphabet::Gaussian => None,
        }
    }

    pub fn support_size(&self) -> Option<usize> {
        match self {
            Alphabet::Finite { values, .. } => Some(values.len()),
            Alphabet::Rademacher => Some(2),
            Alphabet::Gaussian => None,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        match self {
            Alphabet::Finite { values, .. } => values.contains(&v),
            Alphabet::Rademacher => v == 1.0 || v == -1.0,
            Alphabet::Gaussian => v.is_finite(),
        }
    }

    /// Position of `v` in the enumeration order of [`Alphabet::support`].
    pub fn symbol_index(&self, v: f64) -> Option<usize> {
        match self {
            Alphabet::Finite { values, .. } => values.iter().position(|s| *s == v),
            Alphabet::Rademacher if v == -1.0 => Some(0),
            Alphabet::Rademacher if v == 1.0 => Some(1),
            _ => None,
        }
    }

    /// Draws one symbol.
    ///
    /// Finite alphabets use inverse-CDF sampling on one uniform draw.
    /// Gaussian variables use the Box-Muller cosine branch on two uniform
    /// draws `u1 in (0, 1]`, `u2 in [0, 1)`: `sqrt(-2 ln u1) cos(2 pi u2)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Alphabet::Finite { values, weights } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut last_positive = 0;
                for (i, w) in weights.iter().enumerate() {
                    if *w > 0.0 {
                        last_positive = i;
                        acc += w;
                        if u < acc {
                            return values[i];
                        }
                    }
                }
                values[last_positive]
            }
            Alphabet::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Alphabet::Gaussian => {
                let u1 = 1.0 - rng.gen::<f64>();
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            }
        }
    }
}

/// A concrete point of the product set.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment(pub Vec<f64>);

impl Assignment {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The variable set of a function together with its product measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    vars: Arc<[Alphabet]>,
}

impl Domain {
    pub fn new(vars: Vec<Alphabet>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidDomain("a domain needs at least one variable".into()));
        }
        for a in &vars {
            if let Alphabet::Finite { values, weights } = a {
                // Re-validate in case the enum was built literally.
                Alphabet::finite(values.clone(), weights.clone())?;
            }
        }
        Ok(Domain { vars: vars.into() })
    }

    /// `n` variables, each uniform on the residues `0..q`.
    pub fn uniform_zq(n: usize, q: u64) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidDomain("q must be at least 1".into()));
        }
        let alpha = Alphabet::uniform((0..q).map(|v| v as f64).collect())?;
        Self::new(vec![alpha; n])
    }

    pub fn rademacher(n: usize) -> Result<Self> {
        Self::new(vec![Alphabet::Rademacher; n])
    }

    pub fn gaussian(n: usize) -> Result<Self> {
        Self::new(vec![Alphabet::Gaussian; n])
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn alphabet(&self, i: usize) -> &Alphabet {
        &self.vars[i]
    }

    pub fn alphabets(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn is_finite(&self) -> bool {
        self.vars.iter().all(|a| a.support_size().is_some())
    }

    /// Number of points in the product set, `None` if any variable is continuous.
    pub fn point_count(&self) -> Option<u128> {
        self.vars.iter().try_fold(1u128, |acc, a| {
            a.support_size().map(|s| acc.saturating_mul(s as u128))
        })
    }

    /// True if every variable is uniform on `0..q`.
    pub fn is_uniform_zq(&self, q: u64) -> bool {
        self.vars.iter().all(|a| match a {
            Alphabet::Finite { values, weights } => {
                values.len() as u64 == q
                    && values.iter().enumerate().all(|(i, v)| *v == i as f64)
                    && weights.iter().all(|w| (w - 1.0 / q as f64).abs() <= WEIGHT_SUM_TOL)
            }
            _ => false,
        })
    }

    /// True if every variable is uniform on `{-1, +1}` (Rademacher or an
    /// equivalent two-symbol finite alphabet).
    pub fn is_pm1_uniform(&self) -> bool {
        self.vars.iter().all(|a| match a {
            Alphabet::Rademacher => true,
            Alphabet::Finite { values, weights } => {
                values.as_slice() == [-1.0, 1.0]
                    && weights.iter().all(|w| (w - 0.5).abs() <= WEIGHT_SUM_TOL)
            }
            Alphabet::Gaussian => false,
        })
    }

    pub fn validate(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.n() {
            return Err(Error::DomainMismatch(format!(
                "arity {} but domain has {} variables",
                a.len(),
                self.n()
            )));
        }
        for (i, (v, alpha)) in a.iter().zip(self.vars.iter()).enumerate() {
            if !alpha.contains(*v) {
                return Err(Error::DomainMismatch(format!(
                    "value {v} is not in the alphabet of variable {i}"
                )));
            }
        }
        Ok(())
    }

    pub fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if let Some(bad) = subset.iter().find(|&&i| i >= self.n()) {
            return Err(Error::InvalidSubset(format!(
                "index {bad} out of range for {} variables",
                self.n()
            )));
        }
        Ok(())
    }

    pub fn sample_assignment<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        Assignment(self.vars.iter().map(|a| a.sample(rng)).collect())
    }

    /// Copies `base` and redraws the coordinates listed in `subset`.
    pub fn resample_subset<R: Rng + ?Sized>(
        &self,
        base: &Assignment,
        subset: &[usize],
        rng: &mut R,
    ) -> Result<Assignment> {
        self.check_subset(subset)?;
        if base.len() != self.n() {
            return Err(Error::DomainMismatch(format!(
                "base assignment has arity {}",
                base.len()
            )));
        }
        let mut out = base.clone();
        for &i in subset {
            out.0[i] = self.vars[i].sample(rng);
        }
        Ok(out)
    }

    /// In-place variant used by the estimators; indices must be in range.
    pub(crate) fn fill<R: Rng + ?Sized>(&self, out: &mut [f64], subset: &[usize], rng: &mut R) {
        for &i in subset {
            out[i] = self.vars[i].sample(rng);
        }
    }
}

/// Codomain tag of an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codomain {
    Zq(u64),
    Real,
}

/// An element of `Z_q` or of the reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupValue {
    Zq { residue: u64, modulus: u64 },
    Real(f64),
}

impl GroupValue {
    pub fn zq(residue: u64, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidParameter(format!("modulus {modulus} < 2")));
        }
        Ok(GroupValue::Zq { residue: residue % modulus, modulus })
    }

    pub fn real(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(GroupValue::Real(v))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn zero(codomain: Codomain) -> Self {
        match codomain {
            Codomain::Zq(q) => GroupValue::Zq { residue: 0, modulus: q },
            Codomain::Real => GroupValue::Real(0.0),
        }
    }

    pub fn codomain(&self) -> Codomain {
        match self {
            GroupValue::Zq { modulus, .. } => Codomain::Zq(*modulus),
            GroupValue::Real(_) => Codomain::Real,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GroupValue::Zq { residue, .. } => *residue == 0,
            GroupValue::Real(v) => *v == 0.0,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            GroupValue::Real(v) => Some(*v),
            GroupValue::Zq { .. } => None,
        }
    }

    pub fn add(self, other: Self) -> Result<Self> {
        match (self, other) {
            (GroupValue::Zq { residue: a, modulus: q }, GroupValue::Zq { residue: b, modulus: r })
                if q == r =>
            {
                Ok(GroupValue::Zq { residue: (a + b) % q, modulus: q })
            }
            (GroupValue::Real(a), GroupValue::Real(b)) => GroupValue::real(a + b),
            (a, b) => Err(Error::CodomainMismatch(format!(
                "cannot add {:?} and {:?}",
                a.codomain(),
                b.codomain()
            ))),
        }
    }

    pub fn neg(self) -> Self {
        match self {
            GroupValue::Zq { residue, modulus } => GroupValue::Zq {
                residue: (modulus - residue) % modulus,
                modulus,
            },
            GroupValue::Real(v) => GroupValue::Real(-v),
        }
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        self.add(other.neg())
    }
}

pub type SampleStream = ChaCha8Rng;

/// Seed plus stream index; every `(seed, stream_id)` pair names one
/// reproducible sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a sequence of words into one 64-bit hash.
pub(crate) fn mix_words(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = 0x6A09_E667_F3BC_C909u64;
    for w in words {
        h = splitmix64(h ^ w);
    }
    h
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        RngSeed { seed, stream_id }
    }

    /// Opens the stream.
    pub fn rng(&self) -> SampleStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child seed for task `id`, independent of the parent's own stream.
    pub fn substream(&self, id: u64) -> RngSeed {
        RngSeed {
            seed: mix_words([self.seed, self.stream_id]),
            stream_id: id,
        }
    }
}
