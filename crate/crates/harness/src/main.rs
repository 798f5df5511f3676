use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varpart_harness::commands::{verdict_counts, RunError};
use varpart_harness::output::{to_csv_string, write_csv, write_outputs};
use varpart_harness::{
    cmd_bench, cmd_decompose, cmd_estimate, cmd_partition, cmd_test, Algorithm, BenchSpec, Budget, ExperimentSpec,
    NormArg, OracleSource, SpecError,
};

/// Learn and test variable partitions of black-box functions.
#[derive(Parser)]
#[command(name = "varpart", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a k-partition and compare it with the brute-force optimum.
    Partition(PartitionArgs),
    /// Test whether the oracle is k-partitionable.
    Test(Common),
    /// Sweep partitioners over variable counts and summarize.
    Bench(BenchArgs),
    /// Estimate every pairwise dependence score.
    Estimate(Common),
    /// Print the Efron-Stein hypergraph of a real-valued oracle.
    Decompose(Common),
}

#[derive(Args)]
struct Common {
    /// Oracle file (zq, quad or hg format) or builtin:<name>.
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// hamming:<q> or lp:<p>.
    #[arg(long, default_value = "lp:2")]
    norm: String,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    reps: Option<usize>,
    /// CSV output; a JSON sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare against the brute-force optimum even above n = 10.
    #[arg(long)]
    exact: bool,
    /// Samples per mean in the median-of-means estimators.
    #[arg(long)]
    samples: Option<usize>,
    /// Block means per median-of-means estimate.
    #[arg(long)]
    repetitions: Option<usize>,
    /// Tester rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Tester draws per pair over the reals.
    #[arg(long)]
    subbudget: Option<usize>,
    /// Fill the wall_ms column.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    common: Common,
    /// greedy, queyranne or multiway.
    #[arg(long, default_value = "greedy")]
    algorithm: String,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated variable counts.
    #[arg(long, value_delimiter = ',', default_value = "5,10")]
    ns: Vec<usize>,
    /// Comma-separated partitioners.
    #[arg(long, value_delimiter = ',', default_value = "greedy,queyranne")]
    algorithms: Vec<String>,
}

impl Common {
    fn spec(&self, algorithm: Algorithm, default_oracle: Option<&str>, default_reps: usize) -> Result<ExperimentSpec, SpecError> {
        let oracle: OracleSource = match (self.oracle.as_deref(), default_oracle) {
            (Some(s), _) | (None, Some(s)) => s.parse()?,
            (None, None) => return Err(SpecError::new("oracle", "--oracle is required")),
        };
        let norm: NormArg = self.norm.parse()?;
        Ok(ExperimentSpec {
            oracle,
            n: self.n,
            k: self.k,
            norm,
            algorithm,
            budget: Budget {
                epsilon: self.epsilon,
                gamma: self.gamma,
                samples: self.samples,
                repetitions: self.repetitions,
                rounds: self.rounds,
                subbudget: self.subbudget,
            },
            seed: self.seed,
            reps: self.reps.unwrap_or(default_reps),
            exact: self.exact,
            timing: self.timing,
            out: self.out.clone(),
        })
    }
}

fn emit<T: serde::Serialize, E: serde::Serialize>(spec: &impl serde::Serialize, out: Option<&PathBuf>, rows: &[T], extra: E) -> Result<(), RunError> {
    match out {
        Some(path) => write_outputs(path, rows, spec, extra)?,
        None => write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Partition(a) => {
            let algorithm: Algorithm = a.algorithm.parse()?;
            let spec = a.common.spec(algorithm, None, 10)?;
            let rows = cmd_partition(&spec)?;
            let correct = rows.iter().filter(|r| r.correct == Some(true)).count();
            let judged = rows.iter().filter(|r| r.correct.is_some()).count();
            eprintln!("{} runs, {correct}/{judged} optimal", rows.len());
            emit(&spec, spec.out.as_ref(), &rows, serde_json::json!({ "correct": correct, "judged": judged }))
        }
        Command::Test(c) => {
            let spec = c.spec(Algorithm::Tester, None, 10)?;
            let rows = cmd_test(&spec)?;
            let counts = verdict_counts(&rows);
            eprintln!("{} runs, verdicts {counts:?}", rows.len());
            emit(&spec, spec.out.as_ref(), &rows, counts)
        }
        Command::Bench(b) => {
            let algorithms = b
                .algorithms
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<Algorithm>())
                .collect::<Result<Vec<_>, _>>()?;
            let base = b.common.spec(Algorithm::Greedy, Some("builtin:quadratic"), 1000)?;
            let bench = BenchSpec { base, ns: b.ns, algorithms };
            let (rows, summary) = cmd_bench(&bench)?;
            if let Some(path) = &bench.base.out {
                write_outputs(path, &rows, &bench, &summary)?;
            }
            print!("{}", to_csv_string(&summary)?);
            Ok(())
        }
        Command::Estimate(c) => {
            let spec = c.spec(Algorithm::Estimate, None, 1)?;
            let rows = cmd_estimate(&spec)?;
            emit(&spec, spec.out.as_ref(), &rows, serde_json::Value::Null)
        }
        Command::Decompose(c) => {
            let spec = c.spec(Algorithm::Estimate, None, 1)?;
            let text = cmd_decompose(&spec)?.to_text();
            match &spec.out {
                Some(path) => std::fs::write(path, text).map_err(anyhow::Error::from)?,
                None => io::stdout().lock().write_all(text.as_bytes()).map_err(anyhow::Error::from)?,
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Spec(e)) => {
            eprintln!("error: invalid spec: {e}");
            ExitCode::from(2)
        }
        Err(RunError::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
