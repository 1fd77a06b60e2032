//! Exact ground truth on a finite data space.
//!
//! A [`GenerativeOracle`] holds the full sampling model `p(y | theta [, psi])`
//! together with deterministic feature maps `z_i = f_i(y)`. Every expectation
//! here is an exact sum over the data alphabet.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::{
    expected_log_ratio, kl_divergence, normalize_log, Alphabet, FiniteDistribution,
};
use crate::error::{Error, Result};
use crate::feature::{FeatureModel, MAX_FEATURE_ALPHABET};
use crate::hypothesis::HypothesisSpace;
use crate::nuisance::NuisancePrior;
use crate::pool::{ClueValue, CluesObservation};

/// Largest data alphabet accepted.
pub const MAX_DATA_ALPHABET: usize = 10_000;
/// Default slack for the inequality checks.
pub const DEFAULT_SLACK: f64 = 1e-12;
/// Tolerance for reporting equality in the data reduction inequality.
pub const EQUALITY_TOL: f64 = 1e-10;

/// Deterministic map from the data alphabet onto a feature alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    name: String,
    alphabet: Alphabet,
    map: Vec<usize>,
    conditioning: Option<(Alphabet, Vec<usize>)>,
}

impl FeatureMap {
    /// `map[y]` is the symbol index of `f(y)`.
    pub fn new(name: impl Into<String>, alphabet: Alphabet, map: Vec<usize>) -> Result<Self> {
        let name = name.into();
        check_map(&name, &alphabet, &map)?;
        Ok(FeatureMap {
            name,
            alphabet,
            map,
            conditioning: None,
        })
    }

    /// Adds a conditioning map `f^c`.
    pub fn with_conditioning(mut self, alphabet: Alphabet, map: Vec<usize>) -> Result<Self> {
        check_map(&self.name, &alphabet, &map)?;
        if map.len() != self.map.len() {
            return Err(Error::InvalidModel(format!(
                "feature {}: conditioning map covers {} data symbols, feature map {}",
                self.name,
                map.len(),
                self.map.len()
            )));
        }
        self.conditioning = Some((alphabet, map));
        Ok(self)
    }

    pub fn identity(name: impl Into<String>, y_alphabet: &Alphabet) -> Self {
        FeatureMap {
            name: name.into(),
            alphabet: y_alphabet.clone(),
            map: (0..y_alphabet.len()).collect(),
            conditioning: None,
        }
    }

    pub fn constant(name: impl Into<String>, y_len: usize) -> Self {
        FeatureMap {
            name: name.into(),
            alphabet: Alphabet::new(["*"]).expect("single symbol"),
            map: vec![0; y_len],
            conditioning: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn conditioning(&self) -> Option<(&Alphabet, &[usize])> {
        self.conditioning.as_ref().map(|(a, m)| (a, m.as_slice()))
    }

    pub fn apply(&self, y: usize) -> ClueValue {
        ClueValue {
            symbol: self.map[y],
            conditioner: self.conditioning.as_ref().map(|(_, m)| m[y]),
        }
    }
}

fn check_map(name: &str, alphabet: &Alphabet, map: &[usize]) -> Result<()> {
    if alphabet.len() > MAX_FEATURE_ALPHABET {
        return Err(Error::CapExceeded {
            what: "feature alphabet size",
            value: alphabet.len(),
            limit: MAX_FEATURE_ALPHABET,
        });
    }
    if let Some(bad) = map.iter().find(|s| **s >= alphabet.len()) {
        return Err(Error::InvalidModel(format!(
            "feature {name}: map value {bad} outside an alphabet of {} symbols",
            alphabet.len()
        )));
    }
    Ok(())
}

/// Distribution induced on `alphabet` by pushing `p` through `map`.
pub fn induce(p: &FiniteDistribution, map: &[usize], alphabet: Alphabet) -> Result<FiniteDistribution> {
    if map.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "map covers {} symbols, distribution has {}",
            map.len(),
            p.len()
        )));
    }
    let mut mass = vec![0.0; alphabet.len()];
    for (y, z) in map.iter().enumerate() {
        mass[*z] += p.prob(y);
    }
    let logs: Vec<f64> = mass.iter().map(|m| m.ln()).collect();
    normalize_log(alphabet, &logs)
}

/// Full generative model on a finite data alphabet.
#[derive(Clone, Debug)]
pub struct GenerativeOracle {
    space: HypothesisSpace,
    y_alphabet: Alphabet,
    prior: FiniteDistribution,
    nuisance: Option<NuisancePrior>,
    likelihood: Vec<FiniteDistribution>,
    features: Vec<FeatureMap>,
    models: Vec<FeatureModel>,
}

impl GenerativeOracle {
    /// `likelihood` rows are ordered by hypothesis, then by nuisance value.
    pub fn new(
        space: HypothesisSpace,
        y_alphabet: Alphabet,
        prior: FiniteDistribution,
        likelihood: Vec<FiniteDistribution>,
        features: Vec<FeatureMap>,
        nuisance: Option<NuisancePrior>,
    ) -> Result<Self> {
        if y_alphabet.len() > MAX_DATA_ALPHABET {
            return Err(Error::CapExceeded {
                what: "data alphabet size",
                value: y_alphabet.len(),
                limit: MAX_DATA_ALPHABET,
            });
        }
        if prior.alphabet() != space.labels() {
            return Err(Error::AlphabetMismatch(
                "prior is not over the hypothesis space".into(),
            ));
        }
        let rows = space.len() * nuisance.as_ref().map_or(1, NuisancePrior::len);
        if likelihood.len() != rows {
            return Err(Error::InvalidModel(format!(
                "{} likelihood rows, expected {rows}",
                likelihood.len()
            )));
        }
        if likelihood.iter().any(|d| *d.alphabet() != y_alphabet) {
            return Err(Error::AlphabetMismatch(
                "likelihood row not over the data alphabet".into(),
            ));
        }
        if features.is_empty() {
            return Err(Error::InvalidModel("an oracle needs at least one feature".into()));
        }
        for f in &features {
            if f.map.len() != y_alphabet.len() {
                return Err(Error::InvalidModel(format!(
                    "feature {} is defined on {} data symbols, not {}",
                    f.name,
                    f.map.len(),
                    y_alphabet.len()
                )));
            }
        }
        let mut oracle = GenerativeOracle {
            space,
            y_alphabet,
            prior,
            nuisance,
            likelihood,
            features,
            models: Vec::new(),
        };
        oracle.models = (0..oracle.features.len())
            .map(|i| oracle.build_feature_model(i))
            .collect::<Result<_>>()?;
        Ok(oracle)
    }

    pub fn space(&self) -> &HypothesisSpace {
        &self.space
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn prior(&self) -> &FiniteDistribution {
        &self.prior
    }

    pub fn nuisance(&self) -> Option<&NuisancePrior> {
        self.nuisance.as_ref()
    }

    pub fn features(&self) -> &[FeatureMap] {
        &self.features
    }

    /// Feature models derived from the oracle, cached at construction.
    pub fn feature_models(&self) -> &[FeatureModel] {
        &self.models
    }

    /// Owned copy of the derived models, whose tables equal
    /// [`GenerativeOracle::induced_distribution`] for every index combination.
    pub fn derive_feature_models(&self) -> Vec<FeatureModel> {
        self.models.clone()
    }

    fn psi_count(&self) -> usize {
        self.nuisance.as_ref().map_or(1, NuisancePrior::len)
    }

    /// `p(y | theta [, psi])`.
    pub fn likelihood(&self, theta: usize, psi: Option<usize>) -> Result<&FiniteDistribution> {
        if theta >= self.space.len() {
            return Err(Error::IndexOutOfRange {
                index: theta,
                size: self.space.len(),
                context: "hypotheses".into(),
            });
        }
        let psi = match (&self.nuisance, psi) {
            (None, _) => 0,
            (Some(_), None) => {
                return Err(Error::MissingNuisance {
                    feature: "oracle likelihood".into(),
                })
            }
            (Some(n), Some(k)) if k >= n.len() => {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    size: n.len(),
                    context: "nuisance grid".into(),
                })
            }
            (Some(_), Some(k)) => k,
        };
        Ok(&self.likelihood[theta * self.psi_count() + psi])
    }

    /// `p(y | theta)` with the nuisance parameter integrated out.
    pub fn marginal_likelihood(&self, theta: usize) -> Result<FiniteDistribution> {
        match &self.nuisance {
            None => self.likelihood(theta, None).cloned(),
            Some(prior) => {
                let mut mass = vec![0.0; self.y_alphabet.len()];
                for k in 0..prior.len() {
                    let w = prior.prob(k);
                    for (y, m) in mass.iter_mut().enumerate() {
                        *m += w * self.likelihood(theta, Some(k))?.prob(y);
                    }
                }
                let logs: Vec<f64> = mass.iter().map(|m| m.ln()).collect();
                normalize_log(self.y_alphabet.clone(), &logs)
            }
        }
    }

    /// All clue values extracted from `y`.
    pub fn observe(&self, y: usize) -> CluesObservation {
        CluesObservation::new(self.features.iter().map(|f| f.apply(y)).collect())
    }

    /// Distribution of clue `i` under `theta [, psi]`, restricted to the
    /// conditioning slice `conditioner` when given.
    pub fn induced_distribution(
        &self,
        feature: usize,
        theta: usize,
        psi: Option<usize>,
        conditioner: Option<usize>,
    ) -> Result<FiniteDistribution> {
        let f = self.features.get(feature).ok_or(Error::IndexOutOfRange {
            index: feature,
            size: self.features.len(),
            context: "features".into(),
        })?;
        let p = self.likelihood(theta, psi)?;
        match conditioner {
            None => induce(p, &f.map, f.alphabet.clone()),
            Some(c) => {
                let (cond_alphabet, cond_map) = f.conditioning.as_ref().ok_or_else(|| {
                    Error::InvalidModel(format!("feature {} has no conditioning map", f.name))
                })?;
                if c >= cond_alphabet.len() {
                    return Err(Error::IndexOutOfRange {
                        index: c,
                        size: cond_alphabet.len(),
                        context: format!("conditioning alphabet of feature {}", f.name),
                    });
                }
                let mut mass = vec![0.0; f.alphabet.len()];
                for (y, z) in f.map.iter().enumerate() {
                    if cond_map[y] == c {
                        mass[*z] += p.prob(y);
                    }
                }
                let logs: Vec<f64> = mass.iter().map(|m| m.ln()).collect();
                normalize_log(f.alphabet.clone(), &logs).map_err(|_| Error::EmptyConditioningSet {
                    feature,
                    conditioner: c,
                })
            }
        }
    }

    // Conditioning slices with zero probability under some (theta, psi) get a
    // uniform row so that the table stays total.
    fn build_feature_model(&self, i: usize) -> Result<FeatureModel> {
        let f = &self.features[i];
        let grid = self.nuisance.as_ref().map(|n| n.grid().clone());
        let psis: Vec<Option<usize>> = match &grid {
            None => vec![None],
            Some(g) => (0..g.len()).map(Some).collect(),
        };
        let mut table = Vec::new();
        for theta in 0..self.space.len() {
            for psi in &psis {
                match &f.conditioning {
                    None => table.push(self.induced_distribution(i, theta, *psi, None)?),
                    Some((cond, _)) => {
                        for c in 0..cond.len() {
                            match self.induced_distribution(i, theta, *psi, Some(c)) {
                                Ok(d) => table.push(d),
                                Err(Error::EmptyConditioningSet { .. }) => {
                                    table.push(FiniteDistribution::uniform(f.alphabet.clone()))
                                }
                                Err(e) => return Err(e),
                            }
                        }
                    }
                }
            }
        }
        FeatureModel::new(
            f.name.clone(),
            f.alphabet.clone(),
            self.space.len(),
            grid,
            f.conditioning.as_ref().map(|(a, _)| a.clone()),
            table,
        )
    }

    /// Exact posterior `p(theta | y)`, nuisance integrated out.
    pub fn true_posterior(&self, y: usize) -> Result<FiniteDistribution> {
        if y >= self.y_alphabet.len() {
            return Err(Error::IndexOutOfRange {
                index: y,
                size: self.y_alphabet.len(),
                context: "data alphabet".into(),
            });
        }
        let mass = (0..self.space.len())
            .map(|theta| Ok(self.prior.log_prob(theta) + self.marginal_likelihood(theta)?.log_prob(y)))
            .collect::<Result<Vec<_>>>()?;
        normalize_log(self.space.labels().clone(), &mass).map_err(|e| match e {
            Error::AllZeroMass => Error::ZeroMarginalData,
            e => e,
        })
    }

    /// Exact posterior given only the clue values: the data symbols whose
    /// features all match `obs` are summed out.
    pub fn posterior_given_clues(&self, obs: &CluesObservation) -> Result<FiniteDistribution> {
        if obs.len() != self.features.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} observed values for {} features",
                obs.len(),
                self.features.len()
            )));
        }
        let matching: Vec<usize> = (0..self.y_alphabet.len())
            .filter(|y| {
                self.features.iter().zip(&obs.values).all(|(f, v)| {
                    let a = f.apply(*y);
                    a.symbol == v.symbol && (v.conditioner.is_none() || a.conditioner == v.conditioner)
                })
            })
            .collect();
        let mass = (0..self.space.len())
            .map(|theta| {
                let p = self.marginal_likelihood(theta)?;
                let s: f64 = matching.iter().map(|y| p.prob(*y)).sum();
                Ok(self.prior.log_prob(theta) + s.ln())
            })
            .collect::<Result<Vec<_>>>()?;
        normalize_log(self.space.labels().clone(), &mass).map_err(|e| match e {
            Error::AllZeroMass => Error::ZeroMarginalData,
            e => e,
        })
    }

    /// `E_{y ~ p(y | under)}[log l_i(num; y) - log l_i(den; y)]` for the
    /// derived model of clue `i`, by enumeration over the data alphabet.
    pub fn expected_clue_log_ratio(
        &self,
        feature: usize,
        num: usize,
        den: usize,
        under: usize,
    ) -> Result<f64> {
        self.require_nuisance_free("expected log-ratios")?;
        let model = &self.models[feature];
        let f = &self.features[feature];
        let indeterminate = Error::IndeterminateRatio {
            hypothesis: num,
            feature,
        };
        if f.conditioning.is_none() {
            let w = induce(self.likelihood(under, None)?, &f.map, f.alphabet.clone())?;
            return expected_log_ratio(
                &w,
                model.distribution(num, None, None)?,
                model.distribution(den, None, None)?,
            )
            .ok_or(indeterminate);
        }
        let p = self.likelihood(under, None)?;
        let (mut pos_inf, mut neg_inf, mut total) = (false, false, 0.0);
        for y in 0..self.y_alphabet.len() {
            let py = p.prob(y);
            if py == 0.0 {
                continue;
            }
            let v = f.apply(y);
            let a = model.log_prob(num, v.symbol, None, v.conditioner)?;
            let b = model.log_prob(den, v.symbol, None, v.conditioner)?;
            match (a == f64::NEG_INFINITY, b == f64::NEG_INFINITY) {
                (true, true) => return Err(indeterminate),
                (false, true) => pos_inf = true,
                (true, false) => neg_inf = true,
                (false, false) => total += py * (a - b),
            }
        }
        match (pos_inf, neg_inf) {
            (true, true) => Err(indeterminate),
            (true, false) => Ok(f64::INFINITY),
            (false, true) => Ok(f64::NEG_INFINITY),
            (false, false) => Ok(total),
        }
    }

    /// `E_{y ~ p(y | theta_star)}[log L_c(theta, w)]`; `-inf` when some
    /// weighted clue has zero likelihood on the support of `theta_star`.
    pub fn expected_log_composite(&self, theta: usize, theta_star: usize, w: &[f64]) -> Result<f64> {
        crate::pool::check_weights(w, self.features.len())?;
        let mut total = 0.0;
        for (i, wi) in w.iter().enumerate() {
            if *wi != 0.0 {
                total += wi * self.expected_clue_log(i, theta, theta_star)?;
            }
        }
        Ok(total)
    }

    /// `E_{y ~ p(y | under)}[log l_i(theta; y)]`.
    pub fn expected_clue_log(&self, feature: usize, theta: usize, under: usize) -> Result<f64> {
        self.require_nuisance_free("expected log-likelihoods")?;
        let model = &self.models[feature];
        let f = &self.features[feature];
        let p = self.likelihood(under, None)?;
        let mut total = 0.0;
        for y in 0..self.y_alphabet.len() {
            let py = p.prob(y);
            if py == 0.0 {
                continue;
            }
            let v = f.apply(y);
            let l = model.log_prob(theta, v.symbol, None, v.conditioner)?;
            if l == f64::NEG_INFINITY {
                return Ok(l);
            }
            total += py * l;
        }
        Ok(total)
    }

    /// `sum_j pi(theta_j) D(p(y | theta_j) || p(y | theta_0))`, the expected
    /// log-SCL of the full data taken as a single clue.
    pub fn u_star(&self) -> Result<f64> {
        self.require_nuisance_free("u_star")?;
        let reference = self.likelihood(0, None)?;
        let mut total = 0.0;
        for j in 1..self.space.len() {
            let pj = self.prior.prob(j);
            if pj == 0.0 {
                continue;
            }
            total += pj * kl_divergence(self.likelihood(j, None)?, reference)?;
        }
        Ok(total)
    }

    pub(crate) fn require_nuisance_free(&self, what: &str) -> Result<()> {
        if self.nuisance.is_some() {
            return Err(Error::Unsupported(format!(
                "{what} requires a nuisance-free oracle"
            )));
        }
        Ok(())
    }

    /// `n` i.i.d. draws of `(theta, [psi], y)` and the extracted clues.
    /// Deterministic for a given seed.
    pub fn sample_dataset(&self, n: usize, seed: u64) -> Result<Vec<Sample>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weighted = |d: &FiniteDistribution| {
            WeightedIndex::new(d.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))
        };
        let theta_dist = weighted(&self.prior)?;
        let psi_dist = self
            .nuisance
            .as_ref()
            .map(|n| weighted(n.distribution()))
            .transpose()?;
        let y_dists = self
            .likelihood
            .iter()
            .map(weighted)
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let theta = theta_dist.sample(&mut rng);
            let psi = psi_dist.as_ref().map(|d| d.sample(&mut rng));
            let y = y_dists[theta * self.psi_count() + psi.unwrap_or(0)].sample(&mut rng);
            out.push(Sample {
                y,
                theta,
                psi,
                obs: self.observe(y),
            });
        }
        Ok(out)
    }
}

/// One labelled draw from an oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub y: usize,
    pub theta: usize,
    pub psi: Option<usize>,
    pub obs: CluesObservation,
}

/// Outcome of the data reduction check `0 <= D(p~ || pi~) <= D(p || pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataReductionCheck {
    pub reduced: f64,
    pub full: f64,
    pub holds: bool,
    /// Set when both divergences agree, i.e. the feature is sufficient.
    pub equality: bool,
}

/// Compares the divergence between `p` and `reference` before and after
/// pushing both through `map` onto `alphabet`.
pub fn check_data_reduction(
    p: &FiniteDistribution,
    reference: &FiniteDistribution,
    map: &[usize],
    alphabet: Alphabet,
    slack: f64,
) -> Result<DataReductionCheck> {
    let full = kl_divergence(p, reference)?;
    let reduced = kl_divergence(
        &induce(p, map, alphabet.clone())?,
        &induce(reference, map, alphabet)?,
    )?;
    let holds = reduced >= -slack && extended_le(reduced, full, slack);
    let equality = reduced == full || (reduced - full).abs() < EQUALITY_TOL;
    Ok(DataReductionCheck {
        reduced,
        full,
        holds,
        equality,
    })
}

/// `a <= b + slack` on the extended reals.
pub fn extended_le(a: f64, b: f64, slack: f64) -> bool {
    if b == f64::INFINITY || a == f64::NEG_INFINITY {
        return true;
    }
    a <= b + slack
}

/// Outcome of `0 <= E[log L_c(theta*, w)/L_c(theta, w)] <= E[log L(theta*)/L(theta)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationBound {
    pub lower_ok: bool,
    pub middle: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Exact check of the composite-likelihood variation bracket with
/// expectations under `p(y | theta_star)`.
pub fn check_variation_bound(
    oracle: &GenerativeOracle,
    theta: usize,
    theta_star: usize,
    w: &[f64],
    slack: f64,
) -> Result<VariationBound> {
    oracle.require_nuisance_free("the variation bound")?;
    crate::pool::check_weights(w, oracle.features.len())?;
    let mut middle = 0.0;
    for (i, wi) in w.iter().enumerate() {
        if *wi == 0.0 {
            continue;
        }
        middle += wi * oracle.expected_clue_log_ratio(i, theta_star, theta, theta_star)?;
    }
    let upper = kl_divergence(
        oracle.likelihood(theta_star, None)?,
        oracle.likelihood(theta, None)?,
    )?;
    let lower_ok = middle >= -slack;
    Ok(VariationBound {
        lower_ok,
        middle,
        upper,
        holds: lower_ok && extended_le(middle, upper, slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y4() -> Alphabet {
        Alphabet::indexed("y", 4)
    }

    fn small_oracle() -> GenerativeOracle {
        let space = HypothesisSpace::indexed(2).unwrap();
        let prior = FiniteDistribution::from_probs(space.labels().clone(), &[0.5, 0.5]).unwrap();
        let rows = vec![
            FiniteDistribution::from_probs(y4(), &[0.1, 0.2, 0.3, 0.4]).unwrap(),
            FiniteDistribution::from_probs(y4(), &[0.4, 0.3, 0.2, 0.1]).unwrap(),
        ];
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let features = vec![
            FeatureMap::identity("id", &y4()),
            FeatureMap::constant("const", 4),
            FeatureMap::new("half", ab, vec![0, 0, 1, 1]).unwrap(),
        ];
        GenerativeOracle::new(space, y4(), prior, rows, features, None).unwrap()
    }

    #[test]
    fn induced_examples() {
        let o = small_oracle();
        let id = o.induced_distribution(0, 0, None, None).unwrap();
        assert!(id.max_abs_diff(o.likelihood(0, None).unwrap()) < 1e-15);
        let c = o.induced_distribution(1, 0, None, None).unwrap();
        assert_eq!(c.probs(), vec![1.0]);
        let h = o.induced_distribution(2, 0, None, None).unwrap();
        assert!((h.prob(0) - 0.3).abs() < 1e-15 && (h.prob(1) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn derived_models_match_induced() {
        let o = small_oracle();
        let models = o.feature_models();
        assert!(models[0].distribution(1, None, None).unwrap().max_abs_diff(o.likelihood(1, None).unwrap()) < 1e-15);
        let c0 = models[1].distribution(0, None, None).unwrap();
        let c1 = models[1].distribution(1, None, None).unwrap();
        assert_eq!(kl_divergence(c1, c0).unwrap(), 0.0);
    }

    #[test]
    fn conditional_slice() {
        let y = y4();
        let space = HypothesisSpace::indexed(2).unwrap();
        let prior = FiniteDistribution::uniform(space.labels().clone());
        let rows = vec![
            FiniteDistribution::from_probs(y.clone(), &[0.1, 0.2, 0.3, 0.4]).unwrap(),
            FiniteDistribution::from_probs(y.clone(), &[0.0, 0.0, 0.5, 0.5]).unwrap(),
        ];
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let f = FeatureMap::new("z", ab.clone(), vec![0, 1, 0, 1])
            .unwrap()
            .with_conditioning(ab, vec![0, 0, 1, 1])
            .unwrap();
        let o = GenerativeOracle::new(space, y, prior, rows, vec![f], None).unwrap();
        let d = o.induced_distribution(0, 0, None, Some(0)).unwrap();
        assert!((d.prob(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            o.induced_distribution(0, 1, None, Some(0)),
            Err(Error::EmptyConditioningSet { .. })
        ));
        // the empty slice is filled with a uniform row
        let row = o.feature_models()[0].distribution(1, None, Some(0)).unwrap();
        assert_eq!(row.probs(), vec![0.5, 0.5]);
    }

    #[test]
    fn true_posterior_examples() {
        let o = small_oracle();
        let p = o.true_posterior(0).unwrap();
        assert!((p.prob(0) - 0.2).abs() < 1e-15 && (p.prob(1) - 0.8).abs() < 1e-15);

        let space = HypothesisSpace::indexed(2).unwrap();
        let prior = FiniteDistribution::uniform(space.labels().clone());
        let y = Alphabet::indexed("y", 2);
        let rows = vec![
            FiniteDistribution::from_probs(y.clone(), &[0.2, 0.8]).unwrap(),
            FiniteDistribution::from_probs(y.clone(), &[0.6, 0.4]).unwrap(),
        ];
        let o2 = GenerativeOracle::new(space, y.clone(), prior, rows, vec![FeatureMap::identity("id", &y)], None).unwrap();
        let p = o2.true_posterior(0).unwrap();
        assert!((p.prob(0) - 0.25).abs() < 1e-15 && (p.prob(1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_marginal_is_reported() {
        let space = HypothesisSpace::indexed(2).unwrap();
        let prior = FiniteDistribution::uniform(space.labels().clone());
        let y = Alphabet::indexed("y", 2);
        let rows = vec![FiniteDistribution::point_mass(y.clone(), 0).unwrap(); 2];
        let o = GenerativeOracle::new(space, y.clone(), prior, rows, vec![FeatureMap::identity("id", &y)], None).unwrap();
        assert_eq!(o.true_posterior(1), Err(Error::ZeroMarginalData));
    }

    #[test]
    fn u_star_and_reduction() {
        let o = small_oracle();
        let expected = 0.5 * kl_divergence(o.likelihood(1, None).unwrap(), o.likelihood(0, None).unwrap()).unwrap();
        assert!((o.u_star().unwrap() - expected).abs() < 1e-15);

        let p = o.likelihood(1, None).unwrap();
        let r = o.likelihood(0, None).unwrap();
        let id = check_data_reduction(p, r, &[0, 1, 2, 3], y4(), DEFAULT_SLACK).unwrap();
        assert!(id.holds && id.equality);
        let c = check_data_reduction(p, r, &[0, 0, 0, 0], Alphabet::indexed("c", 1), DEFAULT_SLACK).unwrap();
        assert!(c.holds && c.reduced == 0.0 && !c.equality);
        // a negative slack turns the check into a failure
        let bad = check_data_reduction(p, r, &[0, 0, 0, 0], Alphabet::indexed("c", 1), -1.0).unwrap();
        assert!(!bad.holds);
    }

    #[test]
    fn variation_bound_examples() {
        let o = small_oracle();
        let same = check_variation_bound(&o, 1, 1, &[0.2, 0.3, 0.5], DEFAULT_SLACK).unwrap();
        assert_eq!((same.middle, same.upper), (0.0, 0.0));
        assert!(same.holds);
        let id = check_variation_bound(&o, 0, 1, &[1.0, 0.0, 0.0], DEFAULT_SLACK).unwrap();
        assert!((id.middle - id.upper).abs() < 1e-15 && id.holds);
        let mixed = check_variation_bound(&o, 0, 1, &[0.2, 0.3, 0.5], DEFAULT_SLACK).unwrap();
        assert!(mixed.holds && mixed.middle < mixed.upper);
    }

    #[test]
    fn sampling_is_deterministic() {
        let o = small_oracle();
        let a = o.sample_dataset(50, 7).unwrap();
        let b = o.sample_dataset(50, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, o.sample_dataset(50, 8).unwrap());
        for s in &a {
            assert_eq!(s.obs, o.observe(s.y));
        }
    }

    #[test]
    fn forced_sample() {
        let space = HypothesisSpace::indexed(2).unwrap();
        let prior = FiniteDistribution::point_mass(space.labels().clone(), 1).unwrap();
        let y = y4();
        let rows = vec![
            FiniteDistribution::uniform(y.clone()),
            FiniteDistribution::point_mass(y.clone(), 2).unwrap(),
        ];
        let o = GenerativeOracle::new(space, y.clone(), prior, rows, vec![FeatureMap::identity("id", &y)], None).unwrap();
        let s = o.sample_dataset(1, 0).unwrap();
        assert_eq!((s[0].theta, s[0].y), (1, 2));
    }
}
