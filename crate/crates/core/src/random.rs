//! Seeded random problem instances for property checks.
//!
//! Distribution rows are Dirichlet(1, ..., 1) draws; feature maps are random
//! surjections of the data alphabet.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::distribution::{Alphabet, FiniteDistribution};
use crate::hypothesis::HypothesisSpace;
use crate::nuisance::NuisancePrior;
use crate::oracle::{FeatureMap, GenerativeOracle};
use crate::weight::WeightMatrix;

/// Size ranges for [`random_oracle`].
#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub hypotheses: RangeInclusive<usize>,
    pub data_size: RangeInclusive<usize>,
    pub features: RangeInclusive<usize>,
    pub max_feature_alphabet: usize,
    pub nuisance_grid: Option<RangeInclusive<usize>>,
    /// Probability that a feature gets a conditioning map.
    pub conditional_rate: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            hypotheses: 2..=5,
            data_size: 2..=30,
            features: 1..=4,
            max_feature_alphabet: 6,
            nuisance_grid: None,
            conditional_rate: 0.0,
        }
    }
}

/// Uniform draw from the probability simplex.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    if total == 0.0 {
        return vec![1.0 / k as f64; k];
    }
    draws.into_iter().map(|d| d / total).collect()
}

pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, alphabet: &Alphabet) -> FiniteDistribution {
    let p = random_simplex(rng, alphabet.len());
    FiniteDistribution::from_probs(alphabet.clone(), &p).expect("simplex draw is a distribution")
}

/// A map from `0..from` onto all of `0..to` (`to <= from`).
pub fn random_surjection<R: Rng + ?Sized>(rng: &mut R, from: usize, to: usize) -> Vec<usize> {
    assert!(to >= 1 && to <= from, "surjection needs 1 <= to <= from");
    let mut order: Vec<usize> = (0..from).collect();
    order.shuffle(rng);
    let mut map = vec![0; from];
    for (k, y) in order.iter().enumerate() {
        map[*y] = if k < to { k } else { rng.gen_range(0..to) };
    }
    map
}

/// Weight matrix with independent uniform simplex columns.
pub fn random_weight_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> WeightMatrix {
    WeightMatrix::from_columns((0..m).map(|_| random_simplex(rng, n)).collect())
        .expect("simplex columns")
}

pub fn random_oracle<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomConfig) -> GenerativeOracle {
    let k = rng.gen_range(cfg.hypotheses.clone());
    let space = HypothesisSpace::indexed(k).expect("valid hypothesis count");
    let ny = rng.gen_range(cfg.data_size.clone());
    let y = Alphabet::indexed("y", ny);
    let prior = random_distribution(rng, space.labels());
    let nuisance = cfg.nuisance_grid.as_ref().map(|r| {
        let g = rng.gen_range(r.clone());
        NuisancePrior::from_distribution(random_distribution(rng, &Alphabet::indexed("psi", g)))
            .expect("grid within cap")
    });
    let rows = k * nuisance.as_ref().map_or(1, NuisancePrior::len);
    let likelihood = (0..rows).map(|_| random_distribution(rng, &y)).collect();
    let n = rng.gen_range(cfg.features.clone());
    let features = (0..n)
        .map(|i| {
            let size = rng.gen_range(1..=cfg.max_feature_alphabet.min(ny));
            let alphabet = Alphabet::indexed(&format!("f{i}_"), size);
            let map = random_surjection(rng, ny, size);
            let f = FeatureMap::new(format!("f{i}"), alphabet, map).expect("valid map");
            if rng.gen_bool(cfg.conditional_rate) {
                let csize = rng.gen_range(1..=3.min(ny));
                let cmap = random_surjection(rng, ny, csize);
                f.with_conditioning(Alphabet::indexed(&format!("c{i}_"), csize), cmap)
                    .expect("valid conditioning map")
            } else {
                f
            }
        })
        .collect();
    GenerativeOracle::new(space, y, prior, likelihood, features, nuisance)
        .expect("random oracle is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::validate_simplex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn surjection_hits_every_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let map = random_surjection(&mut rng, 10, 4);
            for s in 0..4 {
                assert!(map.contains(&s));
            }
        }
    }

    #[test]
    fn generator_is_reproducible() {
        let cfg = RandomConfig {
            nuisance_grid: Some(1..=3),
            conditional_rate: 0.5,
            ..RandomConfig::default()
        };
        let a = random_oracle(&mut ChaCha8Rng::seed_from_u64(11), &cfg);
        let b = random_oracle(&mut ChaCha8Rng::seed_from_u64(11), &cfg);
        assert_eq!(a.likelihood(0, Some(0)).unwrap(), b.likelihood(0, Some(0)).unwrap());
        assert_eq!(a.features(), b.features());
        assert!(validate_simplex(&random_simplex(&mut ChaCha8Rng::seed_from_u64(1), 7), 1e-12));
    }
}
