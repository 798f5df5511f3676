use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varpart::estimators::{estimate_dependence, estimate_norm, pth_root, EstimatorBudget, NormSpec};
use varpart::exact::{exact_dependence_norm, exact_pair_cost, truth_table_of};
use varpart::oracles::{random_fourier_sparse, random_truth_table, truth_table_oracle};
use varpart::{Domain, GroupValue, Oracle};
use varpart_testkit::{df_moment, hamming_cost, hamming_df, l2_cost_sq, Space};

fn table_oracle(q: u64, n: usize, seed: u64) -> Oracle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = random_truth_table(q, n, &mut rng).unwrap();
    truth_table_oracle(&t, &Domain::uniform_zq(n, q).unwrap()).unwrap()
}

fn entries_fn(o: &Oracle) -> impl Fn(&[usize]) -> u64 {
    let t = truth_table_of(o).unwrap();
    move |d: &[usize]| t.get(d)
}

/// Splits of `0..n` into disjoint nonempty `X`, `Y` with the rest as `Z`.
fn pairs(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for v in 0..n {
            match c % 3 {
                1 => x.push(v),
                2 => y.push(v),
                _ => {}
            }
            c /= 3;
        }
        if !x.is_empty() && !y.is_empty() && x[0] < y[0] {
            out.push((x, y));
        }
    }
    out
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u
}

#[test]
fn hamming_axioms_on_tables() {
    let n = 3;
    let space = Space::uniform_zq(n, 3);
    for seed in 0..20 {
        let f = entries_fn(&table_oracle(3, n, seed));
        let g = entries_fn(&table_oracle(3, n, seed + 1000));
        let pts = space.points();
        let norm = |h: &dyn Fn(&[usize]) -> u64| {
            pts.iter().filter(|(p, _)| h(&p.iter().map(|v| *v as usize).collect::<Vec<_>>()) != 0).map(|(_, w)| w).sum::<f64>()
        };
        assert_eq!(norm(&|_| 0), 0.0);
        let sum = |d: &[usize]| (f(d) + g(d)) % 3;
        assert!(norm(&sum) <= norm(&f) + norm(&g) + 1e-12);
        // Fixing variable 0 and averaging the norm of the restriction.
        let avg: f64 = (0..3)
            .map(|a| {
                let restricted = |d: &[usize]| if d[0] == a { f(d) } else { 0 };
                3.0 * norm(&restricted) / 3.0
            })
            .sum();
        assert!(avg <= norm(&f) + 1e-9);
    }
}

#[test]
fn real_p_axioms_on_tables() {
    let n = 3;
    let space = Space::cube(n);
    let pts = space.points();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let p = rng.gen_range(1.0..4.0);
        let fa: Vec<f64> = (0..pts.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ga: Vec<f64> = (0..pts.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = |h: &dyn Fn(usize) -> f64| pth_root(pts.iter().enumerate().map(|(i, (_, w))| w * h(i).abs().powf(p)).sum(), p);
        assert_eq!(norm(&|_| 0.0), 0.0);
        assert!(norm(&|i| fa[i] + ga[i]) <= norm(&|i| fa[i]) + norm(&|i| ga[i]) + 1e-9);
        // Conditioning on variable 0: the first half of the points has x_0 = -1.
        let half = pts.len() / 2;
        let cond = |range: std::ops::Range<usize>| {
            pth_root(range.map(|i| fa[i].abs().powf(p)).sum::<f64>() / half as f64, p)
        };
        let avg = 0.5 * cond(0..half) + 0.5 * cond(half..pts.len());
        assert!(avg <= norm(&|i| fa[i]) + 1e-9);
    }
}

#[test]
fn factor_four_sandwich_on_binary_tables() {
    let mut checked = 0;
    for n in 2..=4 {
        for seed in 0..(if n == 4 { 40 } else { 30 }) {
            let o = table_oracle(2, n, 100 * n as u64 + seed);
            let f = entries_fn(&o);
            for (x, y) in pairs(n) {
                let z: Vec<usize> = (0..n).filter(|v| !x.contains(v) && !y.contains(v)).collect();
                if n == 4 && !z.is_empty() {
                    continue;
                }
                let delta = hamming_cost(&f, 2, n, &[union(&x, &z), union(&y, &z)]);
                let d = hamming_df(&f, 2, n, &x, &y);
                assert!(delta <= d + 1e-12 && d <= 4.0 * delta + 1e-12, "n={n} x={x:?} y={y:?}: {delta} vs {d}");
                assert!((exact_pair_cost(&o, &x, &y, NormSpec::HammingZq).unwrap() - delta).abs() < 1e-12);
                assert!((exact_dependence_norm(&o, &x, &y, NormSpec::HammingZq).unwrap() - d).abs() < 1e-12);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 30 + 30 * 6 + 40 * 7);
}

#[test]
fn two_norm_identity_with_and_without_z() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let n = rng.gen_range(3..=6);
        let fs = random_fourier_sparse(n, 6, 3, &mut rng);
        let o = fs.oracle().unwrap();
        let f = |a: &[f64]| fs.eval(a);
        for (x, y) in pairs(n).into_iter().step_by(7) {
            let z: Vec<usize> = (0..n).filter(|v| !x.contains(v) && !y.contains(v)).collect();
            let d2 = df_moment(&Space::cube(n), &f, &x, &y, 2.0);
            let delta2 = l2_cost_sq(&Space::cube(n), &f, &[union(&x, &z), union(&y, &z)]);
            assert!((d2 - 4.0 * delta2).abs() < 1e-9, "{d2} vs 4 * {delta2}");
            let lib = exact_pair_cost(&o, &x, &y, NormSpec::RealP(2.0)).unwrap();
            assert!((lib * lib - delta2).abs() < 1e-9);
            let lib_d = exact_dependence_norm(&o, &x, &y, NormSpec::RealP(2.0)).unwrap();
            assert!((lib_d * lib_d - d2).abs() < 1e-9);
        }
    }
}

#[test]
fn estimate_norm_concentrates() {
    // Hamming: Bernoulli(0.3); 2-norm: a Rademacher coordinate times 0.8.
    let budget = EstimatorBudget::new(0.05, 0.1).unwrap().with_samples_per_mean(2000);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut misses = 0;
    for _ in 0..100 {
        let h = estimate_norm(|| GroupValue::zq(u64::from(rng.gen_bool(0.3)), 2), NormSpec::HammingZq, &budget).unwrap();
        if (h - 0.3).abs() > 0.05 {
            misses += 1;
        }
        let r = estimate_norm(
            || GroupValue::real(if rng.gen_bool(0.5) { 0.8 } else { -0.8 } * rng.gen_range(0.5..1.5)),
            NormSpec::RealP(2.0),
            &budget,
        )
        .unwrap();
        let exact = 0.8 * (13.0f64 / 12.0).sqrt();
        if (r - exact).abs() > 0.05 {
            misses += 1;
        }
    }
    assert!(misses <= 20 + 10, "{misses} misses in 200 trials");
}

#[test]
fn dependence_estimate_examples() {
    let o = Oracle::zq(Domain::uniform_zq(3, 2).unwrap(), 2, |a| ((a[0] as u64) & (a[1] as u64)) ^ (a[2] as u64)).unwrap();
    let b = EstimatorBudget::new(0.1, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let e = estimate_dependence(&o, &[0], &[1], NormSpec::HammingZq, &b, &mut rng).unwrap();
    assert!((0.25 - 0.1..=0.25 + 0.2).contains(&e), "{e}");
    let r = Oracle::real(Domain::rademacher(3).unwrap(), |a| a[0] * a[1] + 0.5 * a[1] * a[2]);
    let b = EstimatorBudget::new(0.1, 0.05).unwrap().with_samples_per_mean(4000);
    let e = estimate_dependence(&r, &[1], &[2], NormSpec::RealP(2.0), &b, &mut rng).unwrap();
    assert!((0.95..=1.2).contains(&e), "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pth_root_turns_moment_error_into_norm_error(t in 0.0f64..2.0, frac in 0.0f64..1.0, eps in 0.001f64..1.0, p in 1.0f64..6.0) {
        // If t^p <= s <= t^p + eps^p then t <= s^(1/p) <= t + eps.
        let s = t.powf(p) + frac * eps.powf(p);
        let r = pth_root(s, p);
        prop_assert!(r >= t - 1e-9);
        prop_assert!(r <= t + eps + 1e-9);
    }

    #[test]
    fn sandwich_holds_for_random_ternary_pairs(seed in 0u64..10_000) {
        let o = table_oracle(3, 2, seed);
        let f = entries_fn(&o);
        let delta = hamming_cost(&f, 3, 2, &[vec![0], vec![1]]);
        let d = hamming_df(&f, 3, 2, &[0], &[1]);
        prop_assert!(delta <= d + 1e-12 && d <= 4.0 * delta + 1e-12);
    }
}
