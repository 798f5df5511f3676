//! Learning and testing variable partitions of multivariate functions from
//! query access.

pub mod domain;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod oracle;
pub mod oracles;
pub mod partition;
pub mod partitioners;
pub mod tester;
pub mod union_find;

#[cfg(test)]
mod test_support;

pub use domain::{Alphabet, Assignment, Codomain, Domain, GroupValue, RngSeed, SampleStream};
pub use error::{Error, Result};
pub use oracle::{Evaluator, Oracle};
pub use partition::Partition;
