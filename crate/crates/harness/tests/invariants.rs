use proptest::prelude::*;
use varpart::Partition;
use varpart_harness::output::{format_partition, parse_partition, to_csv_string};
use varpart_harness::{cmd_partition, Algorithm, Budget, ExperimentSpec, NormArg, OracleSource};

fn spec(oracle: &str, n: usize, k: usize, norm: NormArg, algorithm: Algorithm, seed: u64) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(oracle.parse::<OracleSource>().unwrap(), algorithm);
    s.n = Some(n);
    s.k = k;
    s.norm = norm;
    s.seed = seed;
    s.reps = 2;
    s.budget = Budget { samples: Some(200), repetitions: Some(3), ..Budget::default() };
    s
}

fn partitioners() -> impl Strategy<Value = (&'static str, usize, usize, NormArg, Algorithm)> {
    prop_oneof![
        (4usize..=6, 2usize..=3).prop_map(|(n, k)| ("builtin:additive", n, k, NormArg::Hamming(2), Algorithm::Greedy)),
        (3usize..=7).prop_map(|n| ("builtin:quadratic", n, 2, NormArg::Lp(2.0), Algorithm::Queyranne)),
        (4usize..=6).prop_map(|n| ("builtin:quadratic", n, 3, NormArg::Lp(2.0), Algorithm::Multiway)),
        (3usize..=7).prop_map(|n| ("builtin:random-table", n, 2, NormArg::Hamming(2), Algorithm::Greedy)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rows_never_beat_the_optimum((oracle, n, k, norm, alg) in partitioners(), seed in any::<u64>()) {
        let rows = cmd_partition(&spec(oracle, n, k, norm, alg, seed)).unwrap();
        for r in &rows {
            let p = parse_partition(&r.partition).unwrap();
            prop_assert_eq!(p.k(), k);
            if let (Some(a), Some(o)) = (r.achieved_cost, r.optimal_cost) {
                prop_assert!(a >= o - 1e-9);
                prop_assert!(r.optimality_ratio().unwrap() >= 1.0 - 1e-6);
            }
        }
    }

    #[test]
    fn csv_depends_only_on_spec_and_seed((oracle, n, k, norm, alg) in partitioners(), seed in any::<u64>()) {
        let s = spec(oracle, n, k, norm, alg, seed);
        let a = to_csv_string(&cmd_partition(&s).unwrap()).unwrap();
        let b = to_csv_string(&cmd_partition(&s).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn partition_text_round_trips(labels in proptest::collection::vec(0usize..4, 1..10)) {
        let p = Partition::from_labels(&labels).unwrap();
        prop_assert_eq!(parse_partition(&format_partition(&p)).unwrap(), p);
    }
}
