//! Turning a validated spec into oracles, one fresh instance per repetition.

use std::fs;

use anyhow::{Context, Result};
use rand::Rng;
use varpart::exact::{efron_stein_decompose, Hypergraph};
use varpart::oracles::{
    additive_oracle, block_quadratic_form, gaussian_quadratic_far_oracle, hidden_junta_oracle, quadratic_oracle,
    random_additive_table, random_quadratic_form, random_truth_table, truth_table_oracle, BlockFunction,
    QuadraticForm, TruthTable,
};
use varpart::{Alphabet, Domain, Oracle, Partition, RngSeed, SampleStream};

use crate::spec::{Builtin, ExperimentSpec, NormArg, OracleSource, SpecError};

/// A parsed oracle file.
#[derive(Debug, Clone)]
pub enum OracleFile {
    Table(TruthTable),
    Quadratic(QuadraticForm),
    Hypergraph(Hypergraph),
}

impl OracleFile {
    /// Dispatches on the header keyword: `zq`, `quad` or `hg`.
    pub fn parse(text: &str) -> std::result::Result<Self, SpecError> {
        let keyword = text.split_whitespace().next().unwrap_or("");
        let parsed = match keyword {
            "zq" => TruthTable::parse(text).map(OracleFile::Table),
            "quad" => QuadraticForm::parse(text).map(OracleFile::Quadratic),
            "hg" => Hypergraph::parse(text).map(OracleFile::Hypergraph),
            other => return Err(SpecError::new("oracle", format!("unknown file header {other:?}; expected zq, quad or hg"))),
        };
        parsed.map_err(|e| SpecError::new("oracle", e.to_string()))
    }

    pub fn n(&self) -> usize {
        match self {
            OracleFile::Table(t) => t.n(),
            OracleFile::Quadratic(f) => f.n(),
            OracleFile::Hypergraph(h) => h.n(),
        }
    }

    fn norm_ok(&self, norm: NormArg) -> bool {
        match self {
            OracleFile::Table(t) => norm == NormArg::Hamming(t.q()),
            OracleFile::Quadratic(_) | OracleFile::Hypergraph(_) => matches!(norm, NormArg::Lp(_)),
        }
    }
}

/// A spec whose oracle source has been resolved and fully validated.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: ExperimentSpec,
    pub n: usize,
    file: Option<OracleFile>,
}

/// A single oracle together with whatever ground truth is known cheaply.
pub struct Instance {
    pub oracle: Oracle,
    /// Exact 2-norm cost structure, when read off the construction.
    pub hypergraph: Option<Hypergraph>,
    pub planted: Option<Partition>,
}

impl Instance {
    /// The 2-norm hypergraph, from the construction or by decomposing the
    /// oracle. Decomposing queries the oracle.
    pub fn exact_hypergraph(&self) -> Result<Hypergraph> {
        match &self.hypergraph {
            Some(h) => Ok(h.clone()),
            None => Ok(Hypergraph::from_function(&efron_stein_decompose(&self.oracle)?)),
        }
    }
}

/// Loads the oracle file if any and validates the whole spec. Nothing is
/// queried here.
pub fn prepare(spec: &ExperimentSpec) -> std::result::Result<Prepared, SpecError> {
    let file = match &spec.oracle {
        OracleSource::Builtin(_) => None,
        OracleSource::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| SpecError::new("oracle", format!("cannot read {}: {e}", path.display())))?;
            Some(OracleFile::parse(&text)?)
        }
    };
    let n = match (&file, spec.n) {
        (Some(f), _) => f.n(),
        (None, Some(n)) => n,
        (None, None) => return Err(SpecError::new("n", "builtin oracles need --n")),
    };
    if let Some(f) = &file {
        if !f.norm_ok(spec.norm) {
            return Err(SpecError::new("norm", format!("{} does not apply to this oracle file", spec.norm)));
        }
    }
    spec.validate_with(n)?;
    Ok(Prepared { spec: spec.clone(), n, file })
}

/// Stream for the instance of repetition `rep`.
pub fn instance_seed(seed: u64, rep: u64) -> RngSeed {
    RngSeed::new(seed).substream(rep).substream(0)
}

/// Stream for the algorithm in repetition `rep`.
pub fn algorithm_seed(seed: u64, rep: u64) -> RngSeed {
    RngSeed::new(seed).substream(rep).substream(1)
}

fn random_k_partition(n: usize, k: usize, rng: &mut SampleStream) -> Partition {
    let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    Partition::from_labels(&labels).expect("labels cover 0..k")
}

fn real_block_function(rng: &mut SampleStream) -> BlockFunction {
    let c = Alphabet::Gaussian.sample(rng);
    let d = Alphabet::Gaussian.sample(rng);
    BlockFunction::real(move |a: &[f64]| c * a.iter().product::<f64>() + d * a.iter().sum::<f64>())
}

impl Prepared {
    pub fn norm(&self) -> NormArg {
        self.spec.norm
    }

    /// Builds the oracle of repetition `rep`. Builtins draw a fresh instance
    /// per repetition; files give the same function every time.
    pub fn instance(&self, rep: u64) -> Result<Instance> {
        let (n, k) = (self.n, self.spec.k);
        let mut rng = instance_seed(self.spec.seed, rep).rng();
        if let Some(file) = &self.file {
            return match file {
                OracleFile::Table(t) => Ok(Instance {
                    oracle: truth_table_oracle(t, &Domain::uniform_zq(n, t.q())?)?,
                    hypergraph: None,
                    planted: None,
                }),
                OracleFile::Quadratic(f) => Ok(Instance {
                    oracle: quadratic_oracle(f, &Domain::rademacher(n)?)?,
                    hypergraph: Some(Hypergraph::from_quadratic(f)),
                    planted: None,
                }),
                OracleFile::Hypergraph(h) => Ok(Instance {
                    oracle: hypergraph_oracle(h)?,
                    hypergraph: Some(h.clone()),
                    planted: None,
                }),
            };
        }
        let OracleSource::Builtin(builtin) = self.spec.oracle else {
            unreachable!("file sources are resolved in prepare")
        };
        let instance = match (builtin, self.spec.norm) {
            (Builtin::Additive, NormArg::Hamming(q)) => {
                let planted = random_k_partition(n, k, &mut rng);
                let t = random_additive_table(q, &planted, &mut rng)?;
                Instance {
                    oracle: truth_table_oracle(&t, &Domain::uniform_zq(n, q)?)?,
                    hypergraph: None,
                    planted: Some(planted),
                }
            }
            (Builtin::Additive, NormArg::Lp(_)) => {
                let planted = random_k_partition(n, k, &mut rng);
                let fs = (0..k).map(|_| real_block_function(&mut rng)).collect();
                let oracle = additive_oracle(&Domain::rademacher(n)?, &planted, fs)?;
                Instance { oracle, hypergraph: None, planted: Some(planted) }
            }
            (Builtin::Quadratic, _) => {
                let form = random_quadratic_form(n, 1.0, &mut rng);
                quadratic_instance(&form, None)?
            }
            (Builtin::BlockQuadratic, _) => {
                let planted = random_k_partition(n, k, &mut rng);
                let form = block_quadratic_form(&planted, &mut rng);
                quadratic_instance(&form, Some(planted))?
            }
            (Builtin::FarQuadratic, _) => {
                let (oracle, form) = gaussian_quadratic_far_oracle(n, &mut rng)?;
                Instance { oracle, hypergraph: Some(Hypergraph::from_quadratic(&form)), planted: None }
            }
            (Builtin::Junta, NormArg::Hamming(q)) => {
                let (oracle, hidden) = hidden_junta_oracle(n, q, &mut rng)?;
                let rest: Vec<usize> = (0..n).filter(|&v| v != hidden).collect();
                let planted = if k == 2 { Some(Partition::new(n, vec![vec![hidden], rest])?) } else { None };
                Instance { oracle, hypergraph: None, planted }
            }
            (Builtin::RandomTable, NormArg::Hamming(q)) => {
                let t = random_truth_table(q, n, &mut rng)?;
                Instance { oracle: truth_table_oracle(&t, &Domain::uniform_zq(n, q)?)?, hypergraph: None, planted: None }
            }
            (b, norm) => unreachable!("validated: builtin:{} with {norm}", b.name()),
        };
        Ok(instance)
    }
}

fn quadratic_instance(form: &QuadraticForm, planted: Option<Partition>) -> Result<Instance> {
    Ok(Instance {
        oracle: quadratic_oracle(form, &Domain::rademacher(form.n())?)?,
        hypergraph: Some(Hypergraph::from_quadratic(form)),
        planted,
    })
}

/// `F = sum_S sqrt(w_S) prod_{i in S} x_i` on the cube, whose hypergraph is `h`.
pub fn hypergraph_oracle(h: &Hypergraph) -> Result<Oracle> {
    let terms: Vec<(Vec<usize>, f64)> = h.edges().into_iter().map(|(s, w)| (s, w.sqrt())).collect();
    let domain = Domain::rademacher(h.n()).context("hypergraph domain")?;
    Ok(Oracle::real(domain, move |a| {
        terms.iter().map(|(s, c)| c * s.iter().map(|&i| a[i]).product::<f64>()).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Algorithm;
    use varpart::exact::efron_stein_decompose;

    fn spec(b: Builtin, norm: NormArg, n: usize, k: usize) -> ExperimentSpec {
        let mut s = ExperimentSpec::new(OracleSource::Builtin(b), Algorithm::Greedy);
        s.n = Some(n);
        s.k = k;
        s.norm = norm;
        s
    }

    #[test]
    fn builtins_build_for_their_norms() {
        for b in Builtin::ALL {
            let norm = if matches!(b, Builtin::Junta | Builtin::RandomTable) { NormArg::Hamming(3) } else { NormArg::Lp(2.0) };
            let p = prepare(&spec(b, norm, 5, 2)).unwrap();
            let inst = p.instance(0).unwrap();
            assert_eq!(inst.oracle.n(), 5);
        }
    }

    #[test]
    fn planted_blocks_have_zero_cost() {
        let p = prepare(&spec(Builtin::BlockQuadratic, NormArg::Lp(2.0), 7, 3)).unwrap();
        for rep in 0..5 {
            let inst = p.instance(rep).unwrap();
            let planted = inst.planted.clone().unwrap();
            assert_eq!(planted.k(), 3);
            assert_eq!(inst.exact_hypergraph().unwrap().cut_cost(&planted).unwrap(), 0.0);
        }
    }

    #[test]
    fn instances_are_reproducible_and_distinct() {
        let p = prepare(&spec(Builtin::Quadratic, NormArg::Lp(2.0), 4, 2)).unwrap();
        let a = p.instance(3).unwrap().hypergraph.unwrap();
        let b = p.instance(3).unwrap().hypergraph.unwrap();
        let c = p.instance(4).unwrap().hypergraph.unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn hypergraph_oracle_realizes_its_weights() {
        let h = Hypergraph::new(4, vec![(vec![0, 1], 0.25), (vec![1, 2, 3], 2.0)]).unwrap();
        let es = efron_stein_decompose(&hypergraph_oracle(&h).unwrap()).unwrap();
        assert!((es.weight(&[0, 1]) - 0.25).abs() < 1e-12);
        assert!((es.weight(&[1, 2, 3]) - 2.0).abs() < 1e-12);
        assert!(es.weight(&[0, 2]).abs() < 1e-12);
    }

    #[test]
    fn file_headers_dispatch() {
        assert!(matches!(OracleFile::parse("zq 2 1\n0 1\n").unwrap(), OracleFile::Table(_)));
        assert!(matches!(OracleFile::parse("hg 3 1\n1.0 2 0 1\n").unwrap(), OracleFile::Hypergraph(_)));
        assert_eq!(OracleFile::parse("xx 1").unwrap_err().field, "oracle");
        assert_eq!(OracleFile::parse("zq 2 2\n0 1\n").unwrap_err().field, "oracle");
    }
}
