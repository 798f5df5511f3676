use proptest::prelude::*;
use rayon::prelude::*;
use varpart::{Alphabet, Assignment, Domain, RngSeed};

fn mixed_domain(n: usize) -> Domain {
    Domain::new(
        (0..n)
            .map(|i| match i % 3 {
                0 => Alphabet::Rademacher,
                1 => Alphabet::Gaussian,
                _ => Alphabet::finite(vec![0.0, 2.0, 5.0], vec![0.2, 0.3, 0.5]).unwrap(),
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn streams_do_not_depend_on_interleaving(seed in any::<u64>(), n in 1usize..8, order in proptest::collection::vec(0u64..4, 1..40)) {
        let d = mixed_domain(n);
        let base = RngSeed::new(seed);
        let solo: Vec<Vec<Assignment>> = (0..4)
            .map(|s| {
                let mut rng = base.substream(s).rng();
                (0..order.len()).map(|_| d.sample_assignment(&mut rng)).collect()
            })
            .collect();
        let mut rngs: Vec<_> = (0..4).map(|s| base.substream(s).rng()).collect();
        let mut used = [0usize; 4];
        for &s in &order {
            let a = d.sample_assignment(&mut rngs[s as usize]);
            prop_assert_eq!(&a, &solo[s as usize][used[s as usize]]);
            used[s as usize] += 1;
        }
    }

    #[test]
    fn resampling_keeps_coordinates_outside_the_subset(seed in any::<u64>(), n in 1usize..9, mask in any::<u16>()) {
        let d = mixed_domain(n);
        let mut rng = RngSeed::new(seed).rng();
        let base = d.sample_assignment(&mut rng);
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let out = d.resample_subset(&base, &subset, &mut rng).unwrap();
        for i in (0..n).filter(|i| !subset.contains(i)) {
            prop_assert_eq!(out.values()[i].to_bits(), base.values()[i].to_bits());
        }
        prop_assert!(d.validate(out.values()).is_ok());
    }
}

#[test]
fn parallel_tasks_reproduce_sequential_draws() {
    let d = mixed_domain(5);
    let seed = RngSeed::new(99);
    let draw = |task: u64| {
        let mut rng = seed.substream(task).rng();
        (0..10).map(|_| d.sample_assignment(&mut rng)).collect::<Vec<_>>()
    };
    let sequential: Vec<_> = (0..64).map(draw).collect();
    let parallel: Vec<_> = (0..64u64).into_par_iter().map(draw).collect();
    assert_eq!(sequential, parallel);
}

#[test]
fn out_of_range_subset_is_rejected() {
    let d = mixed_domain(3);
    let base = d.sample_assignment(&mut RngSeed::new(1).rng());
    assert!(d.resample_subset(&base, &[3], &mut RngSeed::new(1).rng()).is_err());
}
