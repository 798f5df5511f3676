//! Experiment specifications and their validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A rejected specification, naming the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct SpecError {
    pub field: &'static str,
    pub message: String,
}

impl SpecError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        SpecError { field, message: message.into() }
    }
}

fn fail<T>(field: &'static str, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::new(field, message))
}

/// Built-in random oracle families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Sum of random per-block functions on a planted `k`-partition.
    Additive,
    /// Dense random quadratic form on the cube.
    Quadratic,
    /// Quadratic form supported inside the blocks of a planted `k`-partition.
    BlockQuadratic,
    /// Gaussian-coefficient quadratic form, far from every bipartition.
    FarQuadratic,
    /// Random function of all coordinates but one hidden coordinate.
    Junta,
    /// Uniformly random `Z_q` truth table.
    RandomTable,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Additive,
        Builtin::Quadratic,
        Builtin::BlockQuadratic,
        Builtin::FarQuadratic,
        Builtin::Junta,
        Builtin::RandomTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Additive => "additive",
            Builtin::Quadratic => "quadratic",
            Builtin::BlockQuadratic => "block-quadratic",
            Builtin::FarQuadratic => "far-quadratic",
            Builtin::Junta => "junta",
            Builtin::RandomTable => "random-table",
        }
    }

    fn supports(self, norm: NormArg) -> bool {
        match self {
            Builtin::Additive => true,
            Builtin::Quadratic | Builtin::BlockQuadratic | Builtin::FarQuadratic => {
                matches!(norm, NormArg::Lp(_))
            }
            Builtin::Junta | Builtin::RandomTable => matches!(norm, NormArg::Hamming(_)),
        }
    }
}

/// Where the oracle comes from: `builtin:<name>` or a file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum OracleSource {
    Builtin(Builtin),
    File(PathBuf),
}

impl FromStr for OracleSource {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        match s.strip_prefix("builtin:") {
            Some(name) => Builtin::ALL
                .into_iter()
                .find(|b| b.name() == name)
                .map(OracleSource::Builtin)
                .ok_or_else(|| {
                    let known: Vec<&str> = Builtin::ALL.iter().map(|b| b.name()).collect();
                    SpecError::new("oracle", format!("unknown builtin {name:?}; known: {}", known.join(", ")))
                }),
            None if s.is_empty() => fail("oracle", "empty oracle source"),
            None => Ok(OracleSource::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for OracleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleSource::Builtin(b) => write!(f, "builtin:{}", b.name()),
            OracleSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl From<OracleSource> for String {
    fn from(s: OracleSource) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for OracleSource {
    type Error = SpecError;

    fn try_from(s: String) -> Result<Self, SpecError> {
        s.parse()
    }
}

/// `hamming:<q>` or `lp:<p>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum NormArg {
    Hamming(u64),
    Lp(f64),
}

impl NormArg {
    pub fn is_l2(self) -> bool {
        self == NormArg::Lp(2.0)
    }

    pub fn norm_spec(self) -> varpart::estimators::NormSpec {
        match self {
            NormArg::Hamming(_) => varpart::estimators::NormSpec::HammingZq,
            NormArg::Lp(p) => varpart::estimators::NormSpec::RealP(p),
        }
    }
}

impl FromStr for NormArg {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| SpecError::new("norm", format!("expected hamming:<q> or lp:<p>, got {s:?}")))?;
        match kind {
            "hamming" => match value.parse::<u64>() {
                Ok(q) if q >= 2 => Ok(NormArg::Hamming(q)),
                _ => fail("norm", format!("hamming modulus must be an integer >= 2, got {value:?}")),
            },
            "lp" => match value.parse::<f64>() {
                Ok(p) if p.is_finite() && p >= 1.0 => Ok(NormArg::Lp(p)),
                _ => fail("norm", format!("p must be a number >= 1, got {value:?}")),
            },
            _ => fail("norm", format!("unknown norm kind {kind:?}")),
        }
    }
}

impl fmt::Display for NormArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormArg::Hamming(q) => write!(f, "hamming:{q}"),
            NormArg::Lp(p) => write!(f, "lp:{p}"),
        }
    }
}

impl From<NormArg> for String {
    fn from(n: NormArg) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for NormArg {
    type Error = SpecError;

    fn try_from(s: String) -> Result<Self, SpecError> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Greedy,
    Queyranne,
    Multiway,
    Tester,
    Estimate,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Queyranne => "queyranne",
            Algorithm::Multiway => "multiway",
            Algorithm::Tester => "tester",
            Algorithm::Estimate => "estimate",
        }
    }

    pub fn is_partitioner(self) -> bool {
        matches!(self, Algorithm::Greedy | Algorithm::Queyranne | Algorithm::Multiway)
    }
}

impl FromStr for Algorithm {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        [Algorithm::Greedy, Algorithm::Queyranne, Algorithm::Multiway, Algorithm::Tester, Algorithm::Estimate]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| SpecError::new("algorithm", format!("unknown algorithm {s:?}")))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accuracy, confidence and optional sample-count overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub epsilon: f64,
    pub gamma: f64,
    /// Samples per mean for the median-of-means estimators.
    pub samples: Option<usize>,
    /// Number of block means for the median-of-means estimators.
    pub repetitions: Option<usize>,
    /// Tester rounds.
    pub rounds: Option<usize>,
    /// Tester draws per pair over the reals.
    pub subbudget: Option<usize>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { epsilon: 0.1, gamma: 0.1, samples: None, repetitions: None, rounds: None, subbudget: None }
    }
}

impl Budget {
    pub fn estimator(&self) -> varpart::Result<varpart::estimators::EstimatorBudget> {
        let mut b = varpart::estimators::EstimatorBudget::new(self.epsilon, self.gamma)?;
        if let Some(m) = self.samples {
            b = b.with_samples_per_mean(m);
        }
        if let Some(r) = self.repetitions {
            b = b.with_repetitions(r);
        }
        Ok(b)
    }

    pub fn tester(&self, n: usize, k: usize, norm: NormArg) -> varpart::Result<varpart::tester::TesterConfig> {
        let mut c = varpart::tester::TesterConfig::new(n, k, self.epsilon)?;
        if let NormArg::Lp(p) = norm {
            c = c.with_p(p);
        }
        if let Some(r) = self.rounds {
            c = c.with_rounds(r);
        }
        if let Some(m) = self.subbudget {
            c = c.with_subbudget(m);
        }
        c.validate(n)?;
        Ok(c)
    }
}

/// One experiment: an oracle family, an algorithm and how often to run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub oracle: OracleSource,
    /// Variable count; read from the file when absent for file oracles.
    pub n: Option<usize>,
    pub k: usize,
    pub norm: NormArg,
    pub algorithm: Algorithm,
    pub budget: Budget,
    pub seed: u64,
    pub reps: usize,
    /// Force the brute-force comparison above the default size cutoff.
    pub exact: bool,
    /// Record wall-clock times; off keeps the CSV reproducible.
    pub timing: bool,
    pub out: Option<PathBuf>,
}

/// Largest `n` compared against the brute-force optimum by default.
pub const DEFAULT_EXACT_MAX_N: usize = 10;

/// Largest `n` for which the brute-force optimum can be requested.
pub const EXACT_MAX_N: usize = varpart::exact::MAX_ENUMERATION_N;

impl ExperimentSpec {
    pub fn new(oracle: OracleSource, algorithm: Algorithm) -> Self {
        ExperimentSpec {
            oracle,
            n: None,
            k: 2,
            norm: NormArg::Lp(2.0),
            algorithm,
            budget: Budget::default(),
            seed: 0,
            reps: 10,
            exact: false,
            timing: false,
            out: None,
        }
    }

    /// Checks everything that does not need the oracle file, given the
    /// resolved variable count.
    pub fn validate_with(&self, n: usize) -> Result<(), SpecError> {
        if n < 2 {
            return fail("n", format!("need at least 2 variables, got {n}"));
        }
        if n > 64 {
            return fail("n", format!("at most 64 variables are supported, got {n}"));
        }
        if let Some(m) = self.n {
            if m != n {
                return fail("n", format!("--n {m} disagrees with the oracle's {n} variables"));
            }
        }
        let k = self.k;
        if k == 0 || k > n {
            return fail("k", format!("k = {k} must lie in 1..={n}"));
        }
        let b = &self.budget;
        if !(b.epsilon > 0.0 && b.epsilon <= 1.0) {
            return fail("epsilon", format!("must lie in (0, 1], got {}", b.epsilon));
        }
        if !(b.gamma > 0.0 && b.gamma < 1.0) {
            return fail("gamma", format!("must lie in (0, 1), got {}", b.gamma));
        }
        if b.samples == Some(0) {
            return fail("samples", "must be >= 1");
        }
        if b.repetitions == Some(0) {
            return fail("repetitions", "must be >= 1");
        }
        if b.rounds == Some(0) {
            return fail("rounds", "must be >= 1");
        }
        if b.subbudget == Some(0) {
            return fail("subbudget", "must be >= 1");
        }
        if self.reps == 0 {
            return fail("reps", "must be >= 1");
        }
        if let OracleSource::Builtin(builtin) = self.oracle {
            if !builtin.supports(self.norm) {
                return fail("norm", format!("builtin:{} does not support {}", builtin.name(), self.norm));
            }
            if let NormArg::Hamming(q) = self.norm {
                let entries = (q as f64).powi(n as i32);
                if entries > varpart::oracles::MAX_TABLE_ENTRIES as f64 && builtin != Builtin::Junta {
                    return fail("n", format!("a {q}-ary table on {n} variables is too large"));
                }
            }
        }
        match self.algorithm {
            Algorithm::Greedy => {}
            Algorithm::Queyranne => {
                if k != 2 {
                    return fail("k", format!("queyranne learns bipartitions; k must be 2, got {k}"));
                }
                if !self.norm.is_l2() {
                    return fail("norm", format!("queyranne needs lp:2, got {}", self.norm));
                }
            }
            Algorithm::Multiway => {
                if k < 3 {
                    return fail("k", format!("multiway needs k >= 3, got {k}"));
                }
                if n > varpart::partitioners::MAX_MULTIWAY_N {
                    return fail("n", format!("multiway supports n <= {}", varpart::partitioners::MAX_MULTIWAY_N));
                }
                if !self.norm.is_l2() {
                    return fail("norm", format!("multiway needs lp:2, got {}", self.norm));
                }
            }
            Algorithm::Tester => {
                if k < 2 {
                    return fail("k", format!("the tester needs k >= 2, got {k}"));
                }
                b.tester(n, k, self.norm).map_err(|e| SpecError::new("budget", e.to_string()))?;
            }
            Algorithm::Estimate => {}
        }
        if self.algorithm != Algorithm::Tester {
            b.estimator().map_err(|e| SpecError::new("budget", e.to_string()))?;
        }
        if self.exact {
            if n > EXACT_MAX_N {
                return fail("exact", format!("brute force supports n <= {EXACT_MAX_N}, got {n}"));
            }
            if matches!(self.norm, NormArg::Lp(p) if p != 2.0) {
                return fail("exact", format!("no brute-force optimum for {}", self.norm));
            }
        }
        Ok(())
    }

    /// Whether rows carry the brute-force optimum.
    pub fn wants_exact(&self, n: usize) -> bool {
        let supported = matches!(self.norm, NormArg::Hamming(_)) || self.norm.is_l2();
        supported && (self.exact || n <= DEFAULT_EXACT_MAX_N)
    }
}

/// A sweep over variable counts and partitioners on one oracle family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub base: ExperimentSpec,
    pub ns: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.algorithms.is_empty() {
            return fail("algorithms", "at least one algorithm is required");
        }
        if let Some(a) = self.algorithms.iter().find(|a| !a.is_partitioner()) {
            return fail("algorithms", format!("{a} is not a partitioner"));
        }
        if self.ns.is_empty() {
            return fail("ns", "at least one variable count is required");
        }
        if !matches!(self.base.oracle, OracleSource::Builtin(_)) {
            return fail("oracle", "bench sweeps need a builtin oracle family");
        }
        for &n in &self.ns {
            for &a in &self.algorithms {
                let spec = ExperimentSpec { n: Some(n), algorithm: a, exact: true, ..self.base.clone() };
                spec.validate_with(n)?;
            }
        }
        Ok(())
    }
}
