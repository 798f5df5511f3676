//! Partition learners: greedy pairwise estimates, Queyranne bipartitioning
//! with an approximate oracle, and terminal-enumerating multiway partitioning.

mod bipartition;
mod cost;
mod greedy;
mod multiway;
mod queyranne;

pub use bipartition::{
    bipartition_l2, bipartition_l2_report, bipartition_query_budget, min_bipartition_with,
    BipartitionReport,
};
pub use cost::{CutCost, EstimatedL2Cost};
pub use greedy::{greedy_by_edge_removal, greedy_pairwise_partition, removal_order};
pub use multiway::{
    combinations, multiway_k_partition, multiway_k_partition_with, multiway_query_budget, MAX_MULTIWAY_N,
};
pub use queyranne::{brute_force_min_bipartition, queyranne_min_bipartition, MinBipartition, SetFunctionOracle};
