//! Composite likelihood as a log-linear opinion pool.
//!
//! With unit-sum weights the pooled posterior is
//! `p(theta) ∝ prior(theta) * prod_i l_i(theta)^{w_i}`, which is externally
//! Bayesian and minimizes the weighted average KL divergence to the agents'
//! posteriors.

use crate::distribution::{
    kl_divergence, normalize_log, validate_simplex, FiniteDistribution, INPUT_TOL,
};
use crate::error::{Error, Result};
use crate::feature::FeatureModel;

/// Observed value of one clue, with its conditioning symbol when the clue's
/// model is conditional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClueValue {
    pub symbol: usize,
    pub conditioner: Option<usize>,
}

/// Observed clue values `z_1 .. z_n`, positionally matched to feature models.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CluesObservation {
    pub values: Vec<ClueValue>,
}

impl CluesObservation {
    pub fn new(values: Vec<ClueValue>) -> Self {
        CluesObservation { values }
    }

    /// Unconditional observation from symbol indices.
    pub fn from_indices(symbols: &[usize]) -> Self {
        CluesObservation {
            values: symbols
                .iter()
                .map(|s| ClueValue {
                    symbol: *s,
                    conditioner: None,
                })
                .collect(),
        }
    }

    /// Resolves symbol names against the models' alphabets.
    pub fn from_symbols(
        models: &[FeatureModel],
        symbols: &[(&str, Option<&str>)],
    ) -> Result<Self> {
        if symbols.len() != models.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} observed values for {} features",
                symbols.len(),
                models.len()
            )));
        }
        let values = models
            .iter()
            .zip(symbols)
            .map(|(model, (sym, cond))| {
                let symbol = model.alphabet().require(sym, model.name())?;
                let conditioner = match (model.conditioning_alphabet(), cond) {
                    (Some(a), Some(c)) => Some(a.require(c, model.name())?),
                    (Some(_), None) => {
                        return Err(Error::MissingConditioner {
                            feature: model.name().to_string(),
                        })
                    }
                    (None, _) => None,
                };
                Ok(ClueValue {
                    symbol,
                    conditioner,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CluesObservation { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `log l_i(theta) = log p(z_i | theta [, psi] [, z_i^c])`.
pub fn feature_log_likelihood(
    model: &FeatureModel,
    theta: usize,
    value: &ClueValue,
    psi: Option<usize>,
) -> Result<f64> {
    model.log_prob(theta, value.symbol, psi, value.conditioner)
}

/// Log-likelihood table `[clue][theta]` for one observation.
pub fn clue_log_likelihoods(
    models: &[FeatureModel],
    hypotheses: usize,
    obs: &CluesObservation,
    psi: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    check_observation(models, obs)?;
    models
        .iter()
        .zip(&obs.values)
        .map(|(model, value)| {
            (0..hypotheses)
                .map(|theta| feature_log_likelihood(model, theta, value, psi))
                .collect()
        })
        .collect()
}

pub(crate) fn check_observation(models: &[FeatureModel], obs: &CluesObservation) -> Result<()> {
    if models.len() != obs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observed values for {} features",
            obs.len(),
            models.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::WeightDimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    if w.iter().any(|x| *x < 0.0) || !validate_simplex(w, INPUT_TOL) {
        return Err(Error::InvalidWeights(format!("{w:?} is not on the simplex")));
    }
    Ok(())
}

/// `sum_i w_i * v_i` where zero-weight terms are dropped, so a vanishing
/// likelihood with weight zero is ignored rather than producing NaN.
pub(crate) fn weighted_log_sum(w: &[f64], logs: impl Iterator<Item = f64>) -> f64 {
    w.iter()
        .zip(logs)
        .filter(|(wi, _)| **wi != 0.0)
        .map(|(wi, l)| wi * l)
        .sum()
}

/// `log L_c(theta, w) = sum_i w_i log l_i(theta)`.
pub fn composite_log_likelihood(
    models: &[FeatureModel],
    theta: usize,
    obs: &CluesObservation,
    w: &[f64],
    psi: Option<usize>,
) -> Result<f64> {
    check_observation(models, obs)?;
    check_weights(w, models.len())?;
    let logs = models
        .iter()
        .zip(&obs.values)
        .map(|(m, v)| feature_log_likelihood(m, theta, v, psi))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_log_sum(w, logs.into_iter()))
}

/// Log-linear pool of per-clue likelihood vectors `log_likelihoods[i][theta]`.
pub fn pool_log_likelihoods(
    prior: &FiniteDistribution,
    log_likelihoods: &[Vec<f64>],
    w: &[f64],
) -> Result<FiniteDistribution> {
    check_weights(w, log_likelihoods.len())?;
    let k = prior.len();
    if log_likelihoods.iter().any(|row| row.len() != k) {
        return Err(Error::DimensionMismatch(format!(
            "likelihood vectors must have {k} entries"
        )));
    }
    let mass: Vec<f64> = (0..k)
        .map(|theta| {
            let lp = prior.log_prob(theta);
            if lp == f64::NEG_INFINITY {
                return lp;
            }
            lp + weighted_log_sum(w, log_likelihoods.iter().map(|row| row[theta]))
        })
        .collect();
    normalize_log(prior.alphabet().clone(), &mass)
}

/// The composite-likelihood posterior `p(theta) ∝ prior(theta) L_c(theta, w)`.
pub fn log_linear_pool(
    prior: &FiniteDistribution,
    models: &[FeatureModel],
    obs: &CluesObservation,
    w: &[f64],
) -> Result<FiniteDistribution> {
    let table = clue_log_likelihoods(models, prior.len(), obs, None)?;
    pool_log_likelihoods(prior, &table, w)
}

/// Each agent's own posterior `p_i(theta) ∝ prior(theta) l_i(theta)`.
pub fn agent_posteriors(
    prior: &FiniteDistribution,
    log_likelihoods: &[Vec<f64>],
) -> Result<Vec<FiniteDistribution>> {
    log_likelihoods
        .iter()
        .map(|row| pool_log_likelihoods(prior, std::slice::from_ref(row), &[1.0]))
        .collect()
}

/// `sum_i w_i D(candidate || p_i)`. The weights need not sum to one.
pub fn average_kl_objective(
    candidate: &FiniteDistribution,
    agent_posteriors: &[FiniteDistribution],
    w: &[f64],
) -> Result<f64> {
    if w.len() != agent_posteriors.len() {
        return Err(Error::WeightDimensionMismatch {
            expected: agent_posteriors.len(),
            got: w.len(),
        });
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidWeights(format!("{w:?} has negative entries")));
    }
    let mut total = 0.0;
    for (agent, wi) in agent_posteriors.iter().zip(w) {
        let d = kl_divergence(candidate, agent)?;
        if *wi != 0.0 {
            total += wi * d;
        }
    }
    Ok(total)
}
