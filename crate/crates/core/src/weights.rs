//! KL utilities and optimal super composite weights.
//!
//! The expected log-SCL is linear in the weights,
//! `U(W) = sum_j pi(theta_j) sum_i w_ij u_ij` with
//! `u_ij = D(p(z_i | theta_j) || p(z_i | theta_0))`, so each column is
//! maximized on the simplex by putting all mass on the clues of maximal
//! utility.

use crate::distribution::{kl_divergence, FiniteDistribution};
use crate::error::{Error, Result};
use crate::feature::FeatureModel;
use crate::hypothesis::HypothesisSpace;
use crate::oracle::GenerativeOracle;
use crate::pool::CluesObservation;
use crate::scl::scl_log;
use crate::weight::WeightMatrix;

/// Default absolute tolerance (nats) under which utilities count as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// `n x m` matrix of clue utilities; column `c` belongs to hypothesis `c + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityMatrix {
    n: usize,
    columns: Vec<Vec<f64>>,
}

impl UtilityMatrix {
    /// Entries must lie in `[0, +inf]`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || n == 0 {
            return Err(Error::DimensionMismatch("empty utility matrix".into()));
        }
        for col in &columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch("ragged utility matrix".into()));
            }
            if col.iter().any(|u| u.is_nan() || *u < 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "utilities must be non-negative: {col:?}"
                )));
            }
        }
        Ok(UtilityMatrix { n, columns })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, clue: usize, column: usize) -> f64 {
        self.columns[column][clue]
    }

    pub fn column(&self, column: usize) -> &[f64] {
        &self.columns[column]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }
}

/// Optimal weights together with the winning clue set of every column.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSelection {
    pub weights: WeightMatrix,
    /// Clue indices sharing the weight of column `c`.
    pub tie_sets: Vec<Vec<usize>>,
    /// Hypotheses (1-based) that no clue distinguishes from the reference.
    pub invisible: Vec<usize>,
}

impl WeightSelection {
    pub fn warnings(&self, space: &HypothesisSpace) -> Vec<String> {
        self.invisible
            .iter()
            .map(|j| {
                format!(
                    "hypothesis {} is indistinguishable from reference {} through every clue",
                    space.label(*j),
                    space.label(0)
                )
            })
            .collect()
    }
}

fn require_plain(model: &FeatureModel) -> Result<()> {
    if model.is_conditional() || model.is_parametric() {
        return Err(Error::Unsupported(format!(
            "utility of feature {} needs an unconditional, nuisance-free model",
            model.name()
        )));
    }
    Ok(())
}

/// `u_ij = D(p(z_i | theta_j) || p(z_i | theta_0))` for every clue and
/// non-reference hypothesis.
pub fn utility_matrix(models: &[FeatureModel], space: &HypothesisSpace) -> Result<UtilityMatrix> {
    for model in models {
        require_plain(model)?;
        if model.hypothesis_count() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "feature {} covers {} hypotheses, space has {}",
                model.name(),
                model.hypothesis_count(),
                space.len()
            )));
        }
    }
    let columns = (1..space.len())
        .map(|j| {
            models
                .iter()
                .map(|model| {
                    kl_divergence(
                        model.distribution(j, None, None)?,
                        model.distribution(0, None, None)?,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    UtilityMatrix::from_columns(columns)
}

/// `sum_j pi(theta_j) sum_i w_ij u_ij`, with `0 * inf = 0`.
pub fn expected_utility(u: &UtilityMatrix, w: &WeightMatrix, prior: &FiniteDistribution) -> Result<f64> {
    if u.n() != w.n() || u.m() != w.m() || prior.len() != u.m() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "utilities {}x{}, weights {}x{}, prior over {}",
            u.n(),
            u.m(),
            w.n(),
            w.m(),
            prior.len()
        )));
    }
    let mut total = 0.0;
    for c in 0..u.m() {
        let pj = prior.prob(c + 1);
        if pj == 0.0 {
            continue;
        }
        for (ui, wi) in u.column(c).iter().zip(w.column(c)) {
            if *wi != 0.0 {
                total += pj * wi * ui;
            }
        }
    }
    Ok(total)
}

/// Sample mean and standard error of the log-SCL over labelled observations.
pub fn empirical_utility_stats<'a, I>(samples: I, models: &[FeatureModel], w: &WeightMatrix) -> Result<(f64, f64)>
where
    I: IntoIterator<Item = (&'a CluesObservation, usize)>,
{
    let values = samples
        .into_iter()
        .map(|(obs, theta)| scl_log(models, theta, obs, w))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 || !mean.is_finite() {
        return Ok((mean, f64::NAN));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// `(1/N) sum_k log SCL(theta^k; obs^k)`.
pub fn empirical_utility<'a, I>(samples: I, models: &[FeatureModel], w: &WeightMatrix) -> Result<f64>
where
    I: IntoIterator<Item = (&'a CluesObservation, usize)>,
{
    empirical_utility_stats(samples, models, w).map(|(mean, _)| mean)
}

// Winning clues of one column among those allowed by `mask`.
fn winners(column: &[f64], mask: Option<&[bool]>, tie_tol: f64) -> Vec<usize> {
    let allowed = |i: &usize| mask.is_none_or(|m| m[*i]);
    let candidates: Vec<usize> = (0..column.len()).filter(allowed).collect();
    if candidates.iter().any(|i| column[*i] == f64::INFINITY) {
        return candidates
            .into_iter()
            .filter(|i| column[*i] == f64::INFINITY)
            .collect();
    }
    let best = candidates
        .iter()
        .map(|i| column[*i])
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .into_iter()
        .filter(|i| column[*i] >= best - tie_tol)
        .collect()
}

fn split(n: usize, set: &[usize]) -> Vec<f64> {
    let mut col = vec![0.0; n];
    for i in set {
        col[*i] = 1.0 / set.len() as f64;
    }
    col
}

fn select(u: &UtilityMatrix, masks: Option<&[Vec<bool>]>, tie_tol: f64) -> Result<WeightSelection> {
    let mut tie_sets = Vec::with_capacity(u.m());
    let mut invisible = Vec::new();
    for c in 0..u.m() {
        let mask = masks.map(|m| m[c].as_slice());
        let set = winners(u.column(c), mask, tie_tol);
        if set.is_empty() {
            return Err(Error::InvalidWeights(format!(
                "mask leaves no clue for column {c}"
            )));
        }
        if set.iter().all(|i| u.get(*i, c) <= tie_tol) {
            invisible.push(c + 1);
        }
        tie_sets.push(set);
    }
    let weights = WeightMatrix::from_columns(tie_sets.iter().map(|s| split(u.n(), s)).collect())?;
    Ok(WeightSelection {
        weights,
        tie_sets,
        invisible,
    })
}

/// Per-column argmax with equal split over tied winners. An infinite utility
/// beats every finite one.
pub fn optimal_weights(u: &UtilityMatrix, tie_tol: f64) -> WeightSelection {
    select(u, None, tie_tol).expect("unmasked selection always has a winner")
}

/// [`optimal_weights`] restricted to the clues allowed by `masks[c][i]`.
pub fn optimal_weights_masked(u: &UtilityMatrix, masks: &[Vec<bool>], tie_tol: f64) -> Result<WeightSelection> {
    if masks.len() != u.m() || masks.iter().any(|m| m.len() != u.n()) {
        return Err(Error::DimensionMismatch(format!(
            "mask must be {} columns of {} entries",
            u.m(),
            u.n()
        )));
    }
    select(u, Some(masks), tie_tol)
}

/// Best weights under the identical-columns constraint: the clue scores are
/// the prior-weighted row sums of the utilities.
pub fn optimal_constant_weights(
    u: &UtilityMatrix,
    prior: &FiniteDistribution,
    tie_tol: f64,
) -> Result<WeightSelection> {
    if prior.len() != u.m() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "prior over {} hypotheses for {} utility columns",
            prior.len(),
            u.m()
        )));
    }
    let scores: Vec<f64> = (0..u.n())
        .map(|i| {
            (0..u.m())
                .filter(|c| prior.prob(c + 1) != 0.0)
                .map(|c| prior.prob(c + 1) * u.get(i, c))
                .sum()
        })
        .collect();
    let set = winners(&scores, None, tie_tol);
    let invisible = if set.iter().all(|i| scores[*i] <= tie_tol) {
        (1..=u.m()).collect()
    } else {
        Vec::new()
    };
    let weights = WeightMatrix::constant(&split(u.n(), &set), u.m())?;
    Ok(WeightSelection {
        weights,
        tie_sets: vec![set; u.m()],
        invisible,
    })
}

/// `M(theta) = max_w E_{theta_star}[log L_c(theta, w) / L_c(theta_0, w)]`,
/// attained at a vertex of the simplex.
pub fn consistency_envelope(oracle: &GenerativeOracle, theta: usize, theta_star: usize) -> Result<f64> {
    if theta == 0 {
        return Ok(0.0);
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..oracle.features().len() {
        best = best.max(oracle.expected_clue_log_ratio(i, theta, 0, theta_star)?);
    }
    Ok(best)
}

/// `E_{theta_star}[log SCL(theta, W)]` by exact enumeration.
pub fn expected_log_scl(
    oracle: &GenerativeOracle,
    theta: usize,
    theta_star: usize,
    w: &WeightMatrix,
) -> Result<f64> {
    let Some(column) = w.weights_for(theta) else {
        return Ok(0.0);
    };
    let (mut pos_inf, mut neg_inf, mut total) = (false, false, 0.0);
    for (i, wi) in column.iter().enumerate() {
        if *wi == 0.0 {
            continue;
        }
        let v = oracle.expected_clue_log_ratio(i, theta, 0, theta_star)?;
        if v == f64::INFINITY {
            pos_inf = true;
        } else if v == f64::NEG_INFINITY {
            neg_inf = true;
        } else {
            total += wi * v;
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
