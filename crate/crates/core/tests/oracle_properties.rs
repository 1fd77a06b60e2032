mod common;

use proptest::prelude::*;
use rand::Rng;
use sclkit::oracle::{check_data_reduction, check_variation_bound, DEFAULT_SLACK};
use sclkit::random::{random_distribution, random_oracle, random_simplex, random_surjection, RandomConfig};
use sclkit::{Alphabet, FiniteDistribution};

use common::{oracle, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn data_reduction_never_increases_divergence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ny = r.gen_range(1..=30);
        let y = Alphabet::indexed("y", ny);
        let p = random_distribution(&mut r, &y);
        let q = random_distribution(&mut r, &y);
        let nz = r.gen_range(1..=ny);
        let map = random_surjection(&mut r, ny, nz);
        let check = check_data_reduction(&p, &q, &map, Alphabet::indexed("z", nz), DEFAULT_SLACK).unwrap();
        prop_assert!(check.holds);
        prop_assert!(check.reduced >= -DEFAULT_SLACK);

        let identity = check_data_reduction(&p, &q, &(0..ny).collect::<Vec<_>>(), y.clone(), DEFAULT_SLACK).unwrap();
        prop_assert!(identity.holds && identity.equality);
        let constant = check_data_reduction(&p, &q, &vec![0; ny], Alphabet::indexed("z", 1), DEFAULT_SLACK).unwrap();
        prop_assert!(constant.holds);
        prop_assert_eq!(constant.reduced, 0.0);
    }

    #[test]
    fn variation_is_bracketed(seed in any::<u64>()) {
        let o = oracle(seed);
        let mut r = rng(seed ^ 11);
        let w = random_simplex(&mut r, o.features().len());
        let k = o.space().len();
        for star in 0..k {
            for theta in 0..k {
                let b = check_variation_bound(&o, theta, star, &w, DEFAULT_SLACK).unwrap();
                prop_assert!(b.holds, "{:?}", b);
                // conservativeness, restated with the ratio flipped
                prop_assert!(-b.middle >= -b.upper - DEFAULT_SLACK);
                if theta == star {
                    prop_assert_eq!((b.middle, b.upper), (0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn composite_likelihood_is_consistent(seed in any::<u64>()) {
        let o = oracle(seed);
        let mut r = rng(seed ^ 12);
        let w = random_simplex(&mut r, o.features().len());
        let k = o.space().len();
        for star in 0..k {
            let at_star = o.expected_log_composite(star, star, &w).unwrap();
            for theta in 0..k {
                prop_assert!(o.expected_log_composite(theta, star, &w).unwrap() <= at_star + 1e-12);
            }
        }
    }

    #[test]
    fn derived_tables_rematerialize(seed in any::<u64>()) {
        let cfg = RandomConfig { nuisance_grid: Some(1..=3), conditional_rate: 0.5, ..RandomConfig::default() };
        let o = random_oracle(&mut rng(seed), &cfg);
        let psis = o.nuisance().map_or(1, |n| n.len());
        for (i, (f, m)) in o.features().iter().zip(o.feature_models()).enumerate() {
            for theta in 0..o.space().len() {
                for psi in 0..psis {
                    let psi = o.nuisance().map(|_| psi);
                    let p = o.likelihood(theta, psi).unwrap();
                    let conds: Vec<Option<usize>> = match f.conditioning() {
                        None => vec![None],
                        Some((a, _)) => (0..a.len()).map(Some).collect(),
                    };
                    for c in conds {
                        let mut mass = vec![0.0; f.alphabet().len()];
                        for y in 0..p.len() {
                            let v = f.apply(y);
                            if v.conditioner == c {
                                mass[v.symbol] += p.prob(y);
                            }
                        }
                        let total: f64 = mass.iter().sum();
                        let row = m.distribution(theta, psi, c).unwrap();
                        if total == 0.0 {
                            prop_assert!(o.induced_distribution(i, theta, psi, c).is_err());
                            continue;
                        }
                        for (z, x) in mass.iter().enumerate() {
                            prop_assert!((row.prob(z) - x / total).abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn sampled_hypotheses_follow_the_prior() {
    let o = oracle(5);
    let data = o.sample_dataset(100_000, 17).unwrap();
    let mut counts = vec![0usize; o.space().len()];
    for s in &data {
        counts[s.theta] += 1;
    }
    for (t, c) in counts.iter().enumerate() {
        assert!((*c as f64 / data.len() as f64 - o.prior().prob(t)).abs() < 0.01);
    }
    assert_eq!(data[..100], o.sample_dataset(100, 17).unwrap()[..]);
    for s in &data[..1000] {
        assert_eq!(s.obs, o.observe(s.y));
    }
}

#[test]
fn degenerate_oracle_forces_its_sample() {
    let o = oracle(6);
    let k = o.space().len();
    let y = o.y_alphabet().clone();
    let forced = sclkit::GenerativeOracle::new(
        o.space().clone(),
        y.clone(),
        FiniteDistribution::point_mass(o.space().labels().clone(), k - 1).unwrap(),
        (0..k).map(|_| FiniteDistribution::point_mass(y.clone(), 1).unwrap()).collect(),
        o.features().to_vec(),
        None,
    )
    .unwrap();
    let s = &forced.sample_dataset(1, 0).unwrap()[0];
    assert_eq!((s.theta, s.y, s.psi), (k - 1, 1, None));
}
