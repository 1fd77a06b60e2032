//! Super composite likelihood.
//!
//! Each non-reference hypothesis `theta_j` is compared with the reference
//! `theta_0` through its own composite likelihood ratio, using the weight
//! column `w_j`:
//!
//! ```text
//! log SCL(theta_j) = sum_i w_ij (log l_i(theta_j) - log l_i(theta_0)),   log SCL(theta_0) = 0
//! ```
//!
//! The posterior is `p(theta) ∝ prior(theta)/prior(theta_0) * SCL(theta)`.

use crate::distribution::{normalize_log, FiniteDistribution};
use crate::error::{Error, Result};
use crate::feature::FeatureModel;
use crate::hypothesis::HypothesisSpace;
use crate::oracle::GenerativeOracle;
use crate::pool::{clue_log_likelihoods, CluesObservation};
use crate::weight::WeightMatrix;

/// Largest `m` for which the joint over the binary code is materialized.
pub const MAX_ENUMERATED_CODE: usize = 16;

/// Binary truncations `t_1 .. t_m` of `theta`: `t_j` lights up for `theta_j`
/// and stays dark for every other hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PopulationCode {
    m: usize,
}

impl PopulationCode {
    pub fn new(space: &HypothesisSpace) -> Self {
        PopulationCode { m: space.m() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn encode(&self, theta: usize) -> Vec<bool> {
        (1..=self.m).map(|j| j == theta).collect()
    }

    /// The code word of a hypothesis, or `None` for words with several bits set.
    pub fn decode(&self, t: &[bool]) -> Option<usize> {
        let mut on = t.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j + 1);
        match (on.next(), on.next()) {
            (None, _) => Some(0),
            (Some(j), None) => Some(j),
            _ => None,
        }
    }

    /// Kronecker factor `gamma_j(t_j, theta)` for `j` in `1..=m`.
    pub fn gamma(&self, j: usize, t: bool, theta: usize) -> f64 {
        if (theta == j) == t {
            1.0
        } else {
            0.0
        }
    }
}

fn check_shape(table: &[Vec<f64>], w: &WeightMatrix) -> Result<usize> {
    let k = table.first().map_or(0, Vec::len);
    if table.len() != w.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} clues but weight matrix has {} rows",
            table.len(),
            w.n()
        )));
    }
    if k != w.m() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{k} hypotheses but weight matrix has {} columns",
            w.m()
        )));
    }
    Ok(k)
}

/// Log super composite likelihood from a `[clue][theta]` log-likelihood table.
///
/// A clue with zero reference likelihood and positive alternative likelihood
/// contributes `+inf`; a `0/0` ratio with positive weight is an error.
pub fn scl_log_from_likelihoods(table: &[Vec<f64>], theta: usize, w: &WeightMatrix) -> Result<f64> {
    let k = check_shape(table, w)?;
    if theta >= k {
        return Err(Error::IndexOutOfRange {
            index: theta,
            size: k,
            context: "hypotheses".into(),
        });
    }
    let Some(column) = w.weights_for(theta) else {
        return Ok(0.0);
    };
    let (mut pos_inf, mut neg_inf, mut total) = (false, false, 0.0);
    for (i, (row, wi)) in table.iter().zip(column).enumerate() {
        if *wi == 0.0 {
            continue;
        }
        let (a, b) = (row[theta], row[0]);
        match (a == f64::NEG_INFINITY, b == f64::NEG_INFINITY) {
            (true, true) => {
                return Err(Error::IndeterminateRatio {
                    hypothesis: theta,
                    feature: i,
                })
            }
            (false, true) => pos_inf = true,
            (true, false) => neg_inf = true,
            (false, false) => total += wi * (a - b),
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => Err(Error::IndeterminateRatio {
            hypothesis: theta,
            feature: usize::MAX,
        }),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (false, false) => Ok(total),
    }
}

/// `log SCL(theta)` for an observation.
pub fn scl_log(
    models: &[FeatureModel],
    theta: usize,
    obs: &CluesObservation,
    w: &WeightMatrix,
) -> Result<f64> {
    let table = clue_log_likelihoods(models, w.m() + 1, obs, None)?;
    scl_log_from_likelihoods(&table, theta, w)
}

/// SCL posterior from a `[clue][theta]` log-likelihood table.
pub fn scl_posterior_from_likelihoods(
    prior: &FiniteDistribution,
    table: &[Vec<f64>],
    w: &WeightMatrix,
) -> Result<FiniteDistribution> {
    let reference = prior.log_prob(0);
    if reference == f64::NEG_INFINITY {
        return Err(Error::ReferencePriorZero);
    }
    let k = check_shape(table, w)?;
    if prior.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "prior over {} hypotheses, likelihoods over {k}",
            prior.len()
        )));
    }
    let mass = (0..k)
        .map(|theta| {
            let lp = prior.log_prob(theta);
            if lp == f64::NEG_INFINITY {
                return Ok(lp);
            }
            Ok(lp - reference + scl_log_from_likelihoods(table, theta, w)?)
        })
        .collect::<Result<Vec<_>>>()?;
    normalize_log(prior.alphabet().clone(), &mass)
}

/// `p(theta | y) ∝ prior(theta)/prior(theta_0) * SCL(theta)`.
pub fn scl_posterior(
    prior: &FiniteDistribution,
    models: &[FeatureModel],
    obs: &CluesObservation,
    w: &WeightMatrix,
) -> Result<FiniteDistribution> {
    let table = clue_log_likelihoods(models, prior.len(), obs, None)?;
    scl_posterior_from_likelihoods(prior, &table, w)
}

/// One-hot weight matrix sending hypothesis `j` (1-based) to the single clue
/// `iota[j - 1]` (0-based) out of `n`.
pub fn pdf_projection_matrix(iota: &[usize], n: usize) -> Result<WeightMatrix> {
    if iota.is_empty() {
        return Err(Error::InvalidWeights("empty clue assignment".into()));
    }
    let columns = iota
        .iter()
        .map(|&i| {
            if i >= n {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    size: n,
                    context: "clues".into(),
                });
            }
            let mut col = vec![0.0; n];
            col[i] = 1.0;
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    WeightMatrix::from_columns(columns)
}

/// Posterior computed on the population-code graph: every binary unit `t_j`
/// receives the truncated likelihood `p(y | theta_j)` or `p(y | theta_0)`,
/// and the `gamma_j` factors route those messages back to `theta`.
pub fn population_code_posterior(
    oracle: &GenerativeOracle,
    y: usize,
    prior: &FiniteDistribution,
) -> Result<FiniteDistribution> {
    let space = oracle.space();
    let code = PopulationCode::new(space);
    let rows = (0..space.len())
        .map(|theta| oracle.marginal_likelihood(theta))
        .collect::<Result<Vec<_>>>()?;
    if y >= oracle.y_alphabet().len() {
        return Err(Error::IndexOutOfRange {
            index: y,
            size: oracle.y_alphabet().len(),
            context: "data alphabet".into(),
        });
    }
    let reference = rows[0].prob(y);
    if reference == 0.0 {
        return Err(Error::ReferenceLikelihoodZero);
    }
    let truncated = |j: usize, t: bool| if t { rows[j].prob(y) } else { reference };
    let mass: Vec<f64> = (0..space.len())
        .map(|theta| {
            let mut log_p = prior.log_prob(theta);
            for j in 1..=code.m() {
                let message: f64 = [false, true]
                    .iter()
                    .map(|&t| truncated(j, t) * code.gamma(j, t, theta))
                    .sum();
                log_p += message.ln();
            }
            log_p
        })
        .collect();
    normalize_log(space.labels().clone(), &mass)
}

/// Unnormalized log-joint over the binary code `t in {0,1}^m` given the
/// clues: `sum_j log L_cj(t_j, w_j)` with
/// `L_cj(t_j) = prod_i l_i(theta_j or theta_0)^{w_ij}`. Entry `b` holds the
/// configuration with `t_j = (b >> (j - 1)) & 1`.
pub fn bipartite_log_joint(table: &[Vec<f64>], w: &WeightMatrix) -> Result<Vec<f64>> {
    check_shape(table, w)?;
    let m = w.m();
    if m > MAX_ENUMERATED_CODE {
        return Err(Error::CapExceeded {
            what: "binary code length",
            value: m,
            limit: MAX_ENUMERATED_CODE,
        });
    }
    let unit = |j: usize, t: bool| -> f64 {
        let target = if t { j } else { 0 };
        table
            .iter()
            .zip(w.column(j - 1))
            .filter(|(_, wi)| **wi != 0.0)
            .map(|(row, wi)| wi * row[target])
            .sum()
    };
    Ok((0..1usize << m)
        .map(|b| (1..=m).map(|j| unit(j, (b >> (j - 1)) & 1 == 1)).sum())
        .collect())
}
