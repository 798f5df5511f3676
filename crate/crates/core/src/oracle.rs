//! Counted query access to a function `F: Sigma^n -> G`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::domain::{Assignment, Codomain, Domain, GroupValue};
use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type ZqFn = Arc<dyn Fn(&[f64]) -> u64 + Send + Sync>;

/// The evaluator behind an oracle. The codomain is fixed by the variant, so
/// an oracle can never return values from two different groups.
#[derive(Clone)]
pub enum Evaluator {
    Zq { q: u64, f: ZqFn },
    Real(RealFn),
}

impl Evaluator {
    pub fn codomain(&self) -> Codomain {
        match self {
            Evaluator::Zq { q, .. } => Codomain::Zq(*q),
            Evaluator::Real(_) => Codomain::Real,
        }
    }

    pub(crate) fn call(&self, a: &[f64]) -> Result<GroupValue> {
        match self {
            Evaluator::Zq { q, f } => Ok(GroupValue::Zq { residue: f(a) % q, modulus: *q }),
            Evaluator::Real(f) => GroupValue::real(f(a)),
        }
    }
}

/// Oracle handle with an atomic query counter.
pub struct Oracle {
    domain: Domain,
    evaluator: Evaluator,
    queries: AtomicU64,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("n", &self.domain.n())
            .field("codomain", &self.codomain())
            .field("queries", &self.queries())
            .finish()
    }
}

impl Oracle {
    pub fn from_evaluator(domain: Domain, evaluator: Evaluator) -> Result<Self> {
        if let Evaluator::Zq { q, .. } = evaluator {
            if q < 2 {
                return Err(Error::InvalidParameter(format!("modulus {q} < 2")));
            }
        }
        Ok(Oracle { domain, evaluator, queries: AtomicU64::new(0) })
    }

    pub fn real<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Oracle { domain, evaluator: Evaluator::Real(Arc::new(f)), queries: AtomicU64::new(0) }
    }

    pub fn zq<F>(domain: Domain, q: u64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> u64 + Send + Sync + 'static,
    {
        Self::from_evaluator(domain, Evaluator::Zq { q, f: Arc::new(f) })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn codomain(&self) -> Codomain {
        self.evaluator.codomain()
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    /// Number of evaluator invocations so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Checked evaluation: the assignment must belong to the domain.
    pub fn eval(&self, a: &Assignment) -> Result<GroupValue> {
        self.domain.validate(a.values())?;
        self.query(a.values())
    }

    /// Evaluation without the membership check, for points drawn from the
    /// oracle's own domain.
    pub(crate) fn query(&self, a: &[f64]) -> Result<GroupValue> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.evaluator.call(a)
    }

    pub(crate) fn query_real(&self, a: &[f64]) -> Result<f64> {
        match &self.evaluator {
            Evaluator::Real(f) => {
                self.queries.fetch_add(1, Ordering::Relaxed);
                let v = f(a);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite)
                }
            }
            Evaluator::Zq { .. } => Err(Error::CodomainMismatch("expected a real oracle".into())),
        }
    }

    pub(crate) fn require_real(&self) -> Result<()> {
        match self.codomain() {
            Codomain::Real => Ok(()),
            c => Err(Error::CodomainMismatch(format!("expected a real oracle, got {c:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_oracle_counts() {
        let d = Domain::uniform_zq(3, 2).unwrap();
        let o = Oracle::zq(d, 2, |_| 0).unwrap();
        let a = Assignment(vec![1.0, 0.0, 1.0]);
        for m in 1..=5 {
            assert_eq!(o.eval(&a).unwrap(), GroupValue::Zq { residue: 0, modulus: 2 });
            assert_eq!(o.queries(), m);
        }
    }

    #[test]
    fn real_projection() {
        let o = Oracle::real(Domain::rademacher(3).unwrap(), |a| a[0]);
        let v = o.eval(&Assignment(vec![-1.0, 1.0, 1.0])).unwrap();
        assert_eq!(v, GroupValue::Real(-1.0));
    }

    #[test]
    fn mismatched_assignment_rejected() {
        let o = Oracle::real(Domain::rademacher(2).unwrap(), |a| a[0]);
        assert!(matches!(o.eval(&Assignment(vec![1.0])), Err(Error::DomainMismatch(_))));
        assert!(matches!(o.eval(&Assignment(vec![1.0, 0.5])), Err(Error::DomainMismatch(_))));
        // Rejected queries are not evaluator invocations.
        assert_eq!(o.queries(), 0);
    }

    #[test]
    fn nan_output_is_an_error() {
        let o = Oracle::real(Domain::rademacher(1).unwrap(), |_| f64::NAN);
        assert!(matches!(o.eval(&Assignment(vec![1.0])), Err(Error::NonFinite)));
    }
}
