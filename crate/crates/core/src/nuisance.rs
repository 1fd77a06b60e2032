//! Nuisance parameters on a finite grid.
//!
//! The composite evidence integrates the composite likelihood against the
//! nuisance prior, `Lbar_c(theta, w) = sum_psi pi(psi) L_c(theta, psi, w)`.
//! Its super version compares every hypothesis with the reference under the
//! hypothesis' own weight column, each column integrating `psi` on its own.

use crate::distribution::{kl_divergence, log_sum_exp, normalize_log, Alphabet, FiniteDistribution};
use crate::error::{Error, Result};
use crate::feature::{FeatureModel, MAX_NUISANCE_GRID};
use crate::oracle::GenerativeOracle;
use crate::pool::{check_observation, check_weights, feature_log_likelihood, weighted_log_sum, CluesObservation};
use crate::weight::WeightMatrix;
use crate::weights::{optimal_weights, UtilityMatrix, WeightSelection};

/// Prior over a finite nuisance grid.
#[derive(Clone, Debug, PartialEq)]
pub struct NuisancePrior {
    dist: FiniteDistribution,
}

impl NuisancePrior {
    pub fn new(grid: Alphabet, probs: &[f64]) -> Result<Self> {
        if grid.len() > MAX_NUISANCE_GRID {
            return Err(Error::CapExceeded {
                what: "nuisance grid size",
                value: grid.len(),
                limit: MAX_NUISANCE_GRID,
            });
        }
        Ok(NuisancePrior {
            dist: FiniteDistribution::from_probs(grid, probs)?,
        })
    }

    pub fn from_distribution(dist: FiniteDistribution) -> Result<Self> {
        if dist.len() > MAX_NUISANCE_GRID {
            return Err(Error::CapExceeded {
                what: "nuisance grid size",
                value: dist.len(),
                limit: MAX_NUISANCE_GRID,
            });
        }
        Ok(NuisancePrior { dist })
    }

    pub fn uniform(grid: Alphabet) -> Result<Self> {
        Self::from_distribution(FiniteDistribution::uniform(grid))
    }

    pub fn point_mass(grid: Alphabet, index: usize) -> Result<Self> {
        Self::from_distribution(FiniteDistribution::point_mass(grid, index)?)
    }

    pub fn grid(&self) -> &Alphabet {
        self.dist.alphabet()
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.dist.prob(index)
    }

    pub fn log_prob(&self, index: usize) -> f64 {
        self.dist.log_prob(index)
    }

    pub fn distribution(&self) -> &FiniteDistribution {
        &self.dist
    }
}

fn check_grid(models: &[FeatureModel], prior: &NuisancePrior) -> Result<()> {
    for model in models {
        if let Some(grid) = model.nuisance_grid() {
            if grid != prior.grid() {
                return Err(Error::AlphabetMismatch(format!(
                    "nuisance grid of feature {} differs from the prior's grid",
                    model.name()
                )));
            }
        }
    }
    Ok(())
}

// log Lbar_c(theta, w), possibly -inf. Models without a nuisance grid are
// constant in psi.
fn evidence_log(
    models: &[FeatureModel],
    theta: usize,
    obs: &CluesObservation,
    w: &[f64],
    prior: &NuisancePrior,
) -> Result<f64> {
    check_observation(models, obs)?;
    check_weights(w, models.len())?;
    check_grid(models, prior)?;
    let mut terms = Vec::with_capacity(prior.len());
    for psi in 0..prior.len() {
        let lp = prior.log_prob(psi);
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let logs = models
            .iter()
            .zip(&obs.values)
            .map(|(m, v)| feature_log_likelihood(m, theta, v, Some(psi)))
            .collect::<Result<Vec<_>>>()?;
        terms.push(lp + weighted_log_sum(w, logs.into_iter()));
    }
    Ok(log_sum_exp(&terms))
}

/// `log sum_psi pi(psi) prod_i l_i(theta, psi)^{w_i}`.
pub fn composite_evidence_log(
    models: &[FeatureModel],
    theta: usize,
    obs: &CluesObservation,
    w: &[f64],
    prior: &NuisancePrior,
) -> Result<f64> {
    let v = evidence_log(models, theta, obs, w, prior)?;
    if v == f64::NEG_INFINITY {
        return Err(Error::AllZeroMass);
    }
    Ok(v)
}

/// `log [Lbar_c(theta_j, w_j) / Lbar_c(theta_0, w_j)]`, and 0 for the reference.
pub fn super_composite_evidence_log(
    models: &[FeatureModel],
    theta: usize,
    obs: &CluesObservation,
    w: &WeightMatrix,
    prior: &NuisancePrior,
) -> Result<f64> {
    if theta > w.m() {
        return Err(Error::IndexOutOfRange {
            index: theta,
            size: w.m() + 1,
            context: "hypotheses".into(),
        });
    }
    let Some(column) = w.weights_for(theta) else {
        return Ok(0.0);
    };
    let reference = evidence_log(models, 0, obs, column, prior)?;
    if reference == f64::NEG_INFINITY {
        return Err(Error::ReferenceEvidenceZero { column: theta });
    }
    Ok(evidence_log(models, theta, obs, column, prior)? - reference)
}

/// Posterior under the super composite evidence:
/// `p(theta) ∝ prior(theta) * Lbar_c(theta_j, w_j) / Lbar_c(theta_0, w_j)`.
pub fn nuisance_posterior(
    prior_theta: &FiniteDistribution,
    models: &[FeatureModel],
    obs: &CluesObservation,
    w: &WeightMatrix,
    prior_psi: &NuisancePrior,
) -> Result<FiniteDistribution> {
    if prior_theta.log_prob(0) == f64::NEG_INFINITY {
        return Err(Error::ReferencePriorZero);
    }
    if prior_theta.len() != w.m() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "prior over {} hypotheses, weight matrix with {} columns",
            prior_theta.len(),
            w.m()
        )));
    }
    let mass = (0..prior_theta.len())
        .map(|theta| {
            let lp = prior_theta.log_prob(theta);
            if lp == f64::NEG_INFINITY {
                return Ok(lp);
            }
            Ok(lp + super_composite_evidence_log(models, theta, obs, w, prior_psi)?)
        })
        .collect::<Result<Vec<_>>>()?;
    normalize_log(prior_theta.alphabet().clone(), &mass)
}

/// Posterior under the composite evidence with a single weight vector:
/// `p(theta) ∝ prior(theta) Lbar_c(theta, w)`.
pub fn composite_evidence_posterior(
    prior_theta: &FiniteDistribution,
    models: &[FeatureModel],
    obs: &CluesObservation,
    w: &[f64],
    prior_psi: &NuisancePrior,
) -> Result<FiniteDistribution> {
    let mass = (0..prior_theta.len())
        .map(|theta| {
            let lp = prior_theta.log_prob(theta);
            if lp == f64::NEG_INFINITY {
                return Ok(lp);
            }
            Ok(lp + evidence_log(models, theta, obs, w, prior_psi)?)
        })
        .collect::<Result<Vec<_>>>()?;
    normalize_log(prior_theta.alphabet().clone(), &mass)
}

/// Coefficients of the nuisance-averaged objective,
/// `ubar_ij = sum_psi pi(psi) D(p(z_i | theta_j, psi) || p(z_i | theta_0, psi))`.
pub fn nuisance_utility_matrix(
    models: &[FeatureModel],
    hypotheses: usize,
    prior: &NuisancePrior,
) -> Result<UtilityMatrix> {
    check_grid(models, prior)?;
    if let Some(m) = models.iter().find(|m| m.is_conditional()) {
        return Err(Error::Unsupported(format!(
            "utility of feature {} needs an unconditional model",
            m.name()
        )));
    }
    let columns = (1..hypotheses)
        .map(|j| {
            models
                .iter()
                .map(|model| {
                    let mut total = 0.0;
                    for psi in 0..prior.len() {
                        let p = prior.prob(psi);
                        if p == 0.0 {
                            continue;
                        }
                        let d = kl_divergence(
                            model.distribution(j, Some(psi), None)?,
                            model.distribution(0, Some(psi), None)?,
                        )?;
                        total += p * d;
                    }
                    Ok(total)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    UtilityMatrix::from_columns(columns)
}

/// Tie-split argmax of the nuisance-averaged utilities, for explicit tables.
pub fn optimize_weights_nuisance_models(
    models: &[FeatureModel],
    hypotheses: usize,
    prior: &NuisancePrior,
    tie_tol: f64,
) -> Result<(UtilityMatrix, WeightSelection)> {
    let u = nuisance_utility_matrix(models, hypotheses, prior)?;
    let sel = optimal_weights(&u, tie_tol);
    Ok((u, sel))
}

/// Tie-split argmax of the nuisance-averaged utilities of an oracle's
/// exact feature marginals.
pub fn optimize_weights_nuisance(
    oracle: &GenerativeOracle,
    prior: &NuisancePrior,
    tie_tol: f64,
) -> Result<WeightSelection> {
    if oracle.nuisance().is_none() {
        return Err(Error::Unsupported(
            "nuisance weight optimization needs an oracle with a nuisance grid".into(),
        ));
    }
    optimize_weights_nuisance_models(oracle.feature_models(), oracle.space().len(), prior, tie_tol)
        .map(|(_, sel)| sel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> Alphabet {
        Alphabet::indexed("psi", 2)
    }

    // two hypotheses, one binary clue; p(z=0 | theta, psi) given as [theta][psi]
    fn model(p0: [[f64; 2]; 2]) -> FeatureModel {
        let z = Alphabet::indexed("z", 2);
        let rows = p0
            .iter()
            .flatten()
            .map(|p| FiniteDistribution::from_probs(z.clone(), &[*p, 1.0 - p]).unwrap())
            .collect();
        FeatureModel::new("f", z, 2, Some(grid2()), None, rows).unwrap()
    }

    #[test]
    fn evidence_examples() {
        let m = vec![model([[0.2, 0.6], [0.5, 0.9]])];
        let obs = CluesObservation::from_indices(&[0]);
        let point = NuisancePrior::point_mass(grid2(), 1).unwrap();
        let v = composite_evidence_log(&m, 1, &obs, &[1.0], &point).unwrap();
        assert!((v - 0.9f64.ln()).abs() < 1e-15);
        let half = NuisancePrior::uniform(grid2()).unwrap();
        let v = composite_evidence_log(&m, 1, &obs, &[1.0], &half).unwrap();
        assert!((v - (0.5f64 * (0.5 + 0.9)).ln()).abs() < 1e-15);

        let flat = vec![model([[0.3, 0.3], [0.7, 0.7]])];
        let v = composite_evidence_log(&flat, 1, &obs, &[1.0], &half).unwrap();
        assert!((v - 0.7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn super_evidence_two_point_grid() {
        let m = vec![model([[0.2, 0.6], [0.5, 0.9]])];
        let obs = CluesObservation::from_indices(&[0]);
        let prior = NuisancePrior::new(grid2(), &[0.25, 0.75]).unwrap();
        let w = WeightMatrix::uniform(1, 1).unwrap();
        assert_eq!(super_composite_evidence_log(&m, 0, &obs, &w, &prior).unwrap(), 0.0);
        let v = super_composite_evidence_log(&m, 1, &obs, &w, &prior).unwrap();
        let want = ((0.25f64 * 0.5 + 0.75 * 0.9) / (0.25 * 0.2 + 0.75 * 0.6)).ln();
        assert!((v - want).abs() < 1e-14);
    }

    #[test]
    fn reference_evidence_zero() {
        let m = vec![model([[0.0, 0.0], [0.5, 0.9]])];
        let obs = CluesObservation::from_indices(&[0]);
        let prior = NuisancePrior::uniform(grid2()).unwrap();
        let w = WeightMatrix::uniform(1, 1).unwrap();
        assert_eq!(
            super_composite_evidence_log(&m, 1, &obs, &w, &prior),
            Err(Error::ReferenceEvidenceZero { column: 1 })
        );
        assert_eq!(
            composite_evidence_log(&m, 0, &obs, &[1.0], &prior),
            Err(Error::AllZeroMass)
        );
    }

    #[test]
    fn symmetric_grid_gives_tied_weights() {
        // clue 0 separates the hypotheses only under psi0, clue 1 only under psi1
        let z = Alphabet::indexed("z", 2);
        let mk = |name: &str, rows: [[f64; 2]; 2]| {
            let table = rows
                .iter()
                .flatten()
                .map(|p| FiniteDistribution::from_probs(z.clone(), &[*p, 1.0 - p]).unwrap())
                .collect();
            FeatureModel::new(name, z.clone(), 2, Some(grid2()), None, table).unwrap()
        };
        let models = vec![
            mk("a", [[0.5, 0.5], [0.9, 0.5]]),
            mk("b", [[0.5, 0.5], [0.5, 0.9]]),
        ];
        let prior = NuisancePrior::uniform(grid2()).unwrap();
        let (u, sel) = optimize_weights_nuisance_models(&models, 2, &prior, 1e-9).unwrap();
        assert_eq!(u.get(0, 0), u.get(1, 0));
        assert_eq!(sel.weights.column(0), &[0.5, 0.5]);
        // under a point mass on psi0 clue a wins outright
        let point = NuisancePrior::point_mass(grid2(), 0).unwrap();
        let (_, sel) = optimize_weights_nuisance_models(&models, 2, &point, 1e-9).unwrap();
        assert_eq!(sel.weights.column(0), &[1.0, 0.0]);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let m = vec![model([[0.2, 0.6], [0.5, 0.9]])];
        let obs = CluesObservation::from_indices(&[0]);
        let other = NuisancePrior::uniform(Alphabet::indexed("q", 2)).unwrap();
        assert!(matches!(
            composite_evidence_log(&m, 0, &obs, &[1.0], &other),
            Err(Error::AlphabetMismatch(_))
        ));
    }
}
