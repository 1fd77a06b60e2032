#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sclkit::pool::clue_log_likelihoods;
use sclkit::random::{random_oracle, RandomConfig};
use sclkit::GenerativeOracle;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn oracle(seed: u64) -> GenerativeOracle {
    random_oracle(&mut rng(seed), &RandomConfig::default())
}

pub fn oracle_with(seed: u64, cfg: &RandomConfig) -> GenerativeOracle {
    random_oracle(&mut rng(seed), cfg)
}

pub fn nuisance_config() -> RandomConfig {
    RandomConfig {
        nuisance_grid: Some(1..=4),
        ..RandomConfig::default()
    }
}

pub fn tiny_config() -> RandomConfig {
    RandomConfig {
        hypotheses: 2..=4,
        data_size: 2..=6,
        features: 1..=3,
        max_feature_alphabet: 3,
        ..RandomConfig::default()
    }
}

/// `[clue][theta]` log-likelihoods of the clues extracted from `y`.
pub fn table(oracle: &GenerativeOracle, y: usize) -> Vec<Vec<f64>> {
    clue_log_likelihoods(oracle.feature_models(), oracle.space().len(), &oracle.observe(y), None)
        .expect("clues match the derived models")
}
