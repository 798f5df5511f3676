//! Experiment orchestration for the `varpart` command-line tool: specs,
//! oracle instances, the five commands and CSV/JSON output.

pub mod commands;
pub mod instance;
pub mod output;
pub mod spec;

pub use commands::{cmd_bench, cmd_decompose, cmd_estimate, cmd_partition, cmd_test, BenchSummary, RunError};
pub use output::{EstimateRow, ResultRow, RESULT_HEADER};
pub use spec::{Algorithm, BenchSpec, Budget, Builtin, ExperimentSpec, NormArg, OracleSource, SpecError};
