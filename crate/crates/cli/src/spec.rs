//! Problem specification files.
//!
//! A spec names the hypotheses and the reference, optionally a prior, and
//! exactly one model source: explicit feature tables or a generative oracle
//! from which the tables are derived. Tables are nested objects keyed by
//! hypothesis, then nuisance value, then conditioning symbol, with a
//! probability array at the leaves.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sclkit::nuisance::optimize_weights_nuisance_models;
use sclkit::scl::pdf_projection_matrix;
use sclkit::weights::{optimal_weights, utility_matrix, DEFAULT_TIE_TOL};
use sclkit::{
    Alphabet, ClueValue, CluesObservation, FeatureMap, FeatureModel, FiniteDistribution,
    GenerativeOracle, HypothesisSpace, NuisancePrior, UtilityMatrix, WeightMatrix,
    WeightSelection,
};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub hypotheses: Vec<String>,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<FeatureSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nuisance: Option<NuisanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning_alphabet: Option<Vec<String>>,
    pub table: Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub y_alphabet: Vec<String>,
    pub likelihood: Table,
    pub features: Vec<OracleFeatureSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleFeatureSpec {
    pub name: String,
    /// Defaults to the feature values in order of first appearance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    pub map: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning_alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning_map: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuisanceSpec {
    pub grid: Vec<String>,
    /// Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    /// Every column `1/n`: the plain composite likelihood.
    Uniform,
    /// One weight vector shared by every hypothesis, keyed by feature.
    EqualColumns { column: BTreeMap<String, f64> },
    /// Per-column argmax of the clue utilities.
    Optimal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tie_tol: Option<f64>,
    },
    /// A single clue per hypothesis, keyed by hypothesis.
    PdfProjection { iota: BTreeMap<String, String> },
    /// Full matrix keyed by hypothesis, then feature; missing entries are 0.
    Explicit {
        matrix: BTreeMap<String, BTreeMap<String, f64>>,
    },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Optimal { tie_tol: None }
    }
}

/// Nested probability table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Table {
    Row(Vec<f64>),
    Branch(BTreeMap<String, Table>),
}

impl Table {
    // Leaf rows in lexicographic order of the level keys, which must match
    // `levels` exactly at every depth.
    fn rows(&self, levels: &[&[String]], context: &str) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        self.collect_rows(levels, context, &mut out)?;
        Ok(out)
    }

    fn collect_rows(&self, levels: &[&[String]], context: &str, out: &mut Vec<Vec<f64>>) -> Result<()> {
        match (levels.split_first(), self) {
            (None, Table::Row(r)) => {
                out.push(r.clone());
                Ok(())
            }
            (None, Table::Branch(_)) => Err(CliError::Spec(format!(
                "{context}: expected a probability array"
            ))),
            (Some(_), Table::Row(_)) => Err(CliError::Spec(format!(
                "{context}: expected an object keyed by label, found an array"
            ))),
            (Some((keys, rest)), Table::Branch(map)) => {
                if let Some(extra) = map.keys().find(|k| !keys.contains(k)) {
                    return Err(CliError::Spec(format!("{context}: unknown key {extra:?}")));
                }
                for key in keys.iter() {
                    let sub = map
                        .get(key)
                        .ok_or_else(|| CliError::Spec(format!("{context}: missing key {key:?}")))?;
                    sub.collect_rows(rest, &format!("{context}/{key}"), out)?;
                }
                Ok(())
            }
        }
    }
}

/// A loaded and validated problem. Hypothesis 0 is the reference.
#[derive(Clone, Debug)]
pub struct Problem {
    /// Hypothesis labels in the order the spec lists them.
    pub hypotheses: Vec<String>,
    pub space: HypothesisSpace,
    pub prior: FiniteDistribution,
    pub models: Vec<FeatureModel>,
    pub oracle: Option<GenerativeOracle>,
    pub nuisance: Option<NuisancePrior>,
    pub weights: WeightSpec,
}

fn alphabet(symbols: &[String], context: &str) -> Result<Alphabet> {
    Alphabet::new(symbols.iter().cloned()).map_err(|e| CliError::Spec(format!("{context}: {e}")))
}

fn spec_err(context: &str) -> impl Fn(sclkit::Error) -> CliError + '_ {
    move |e| CliError::Spec(format!("{context}: {e}"))
}

fn labelled_probs(map: &BTreeMap<String, f64>, labels: &Alphabet, context: &str) -> Result<Vec<f64>> {
    if let Some(extra) = map.keys().find(|k| labels.index_of(k).is_none()) {
        return Err(CliError::Spec(format!("{context}: unknown label {extra:?}")));
    }
    labels
        .symbols()
        .iter()
        .map(|l| {
            map.get(l)
                .copied()
                .ok_or_else(|| CliError::Spec(format!("{context}: missing label {l:?}")))
        })
        .collect()
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let spec: ProblemSpec = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_spec(spec)
    }

    pub fn from_spec(spec: ProblemSpec) -> Result<Self> {
        let (space, _) = HypothesisSpace::with_reference(&spec.hypotheses, &spec.reference)
            .map_err(spec_err("hypotheses"))?;
        let labels = space.labels().clone();
        let prior = match &spec.prior {
            None => FiniteDistribution::uniform(labels.clone()),
            Some(map) => {
                let probs = labelled_probs(map, &labels, "prior")?;
                FiniteDistribution::from_probs(labels.clone(), &probs).map_err(spec_err("prior"))?
            }
        };
        let nuisance = spec
            .nuisance
            .as_ref()
            .map(|n| {
                let grid = alphabet(&n.grid, "nuisance grid")?;
                match &n.prior {
                    None => NuisancePrior::uniform(grid),
                    Some(map) => NuisancePrior::new(grid.clone(), &labelled_probs(map, &grid, "nuisance prior")?),
                }
                .map_err(spec_err("nuisance prior"))
            })
            .transpose()?;
        let (models, oracle) = match (&spec.features, &spec.oracle) {
            (Some(features), None) => {
                let models = features
                    .iter()
                    .map(|f| feature_model(f, &space, nuisance.as_ref()))
                    .collect::<Result<Vec<_>>>()?;
                if models.is_empty() {
                    return Err(CliError::Spec("at least one feature is required".into()));
                }
                (models, None)
            }
            (None, Some(o)) => {
                let oracle = build_oracle(o, &space, &prior, nuisance.clone())?;
                (oracle.derive_feature_models(), Some(oracle))
            }
            _ => {
                return Err(CliError::Spec(
                    "give exactly one of \"features\" and \"oracle\"".into(),
                ))
            }
        };
        let mut names: Vec<&str> = models.iter().map(FeatureModel::name).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::Spec(format!("duplicate feature name {:?}", w[0])));
        }
        Ok(Problem {
            hypotheses: spec.hypotheses,
            space,
            prior,
            models,
            oracle,
            nuisance,
            weights: spec.weights.unwrap_or_default(),
        })
    }

    /// Internal hypothesis indices in the spec's listing order.
    pub fn display_order(&self) -> Vec<usize> {
        self.hypotheses
            .iter()
            .map(|l| self.space.index_of(l).expect("labels come from the space"))
            .collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m.name() == name)
    }

    fn column_index(&self, label: &str, context: &str) -> Result<usize> {
        match self.space.index_of(label) {
            None => Err(CliError::Spec(format!("{context}: unknown hypothesis {label:?}"))),
            Some(0) => Err(CliError::Spec(format!(
                "{context}: the reference {label:?} has no weight column"
            ))),
            Some(j) => Ok(j - 1),
        }
    }

    fn weight_vector(&self, map: &BTreeMap<String, f64>, context: &str) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.models.len()];
        for (name, v) in map {
            let i = self
                .feature_index(name)
                .ok_or_else(|| CliError::Spec(format!("{context}: unknown feature {name:?}")))?;
            w[i] = *v;
        }
        Ok(w)
    }

    /// Tie-split optimal weights and the utilities they maximize; the
    /// utilities are averaged over the nuisance prior when there is one.
    pub fn optimal_selection(&self, tie_tol: f64) -> Result<(UtilityMatrix, WeightSelection)> {
        if let Some(m) = self.models.iter().find(|m| m.is_conditional()) {
            return Err(CliError::Spec(format!(
                "optimal weights need unconditional features, {} is conditional",
                m.name()
            )));
        }
        match &self.nuisance {
            Some(prior) => Ok(optimize_weights_nuisance_models(
                &self.models,
                self.space.len(),
                prior,
                tie_tol,
            )?),
            None => {
                let u = utility_matrix(&self.models, &self.space)?;
                let sel = optimal_weights(&u, tie_tol);
                Ok((u, sel))
            }
        }
    }

    /// The weight matrix selected by the spec's weight mode.
    pub fn weight_matrix(&self) -> Result<WeightMatrix> {
        let (n, m) = (self.models.len(), self.space.m());
        let w = match &self.weights {
            WeightSpec::Uniform => WeightMatrix::uniform(n, m),
            WeightSpec::EqualColumns { column } => {
                WeightMatrix::constant(&self.weight_vector(column, "weights")?, m)
            }
            WeightSpec::Optimal { tie_tol } => {
                return Ok(self.optimal_selection(tie_tol.unwrap_or(DEFAULT_TIE_TOL))?.1.weights)
            }
            WeightSpec::PdfProjection { iota } => {
                let mut map = vec![None; m];
                for (label, feature) in iota {
                    let c = self.column_index(label, "iota")?;
                    map[c] = Some(self.feature_index(feature).ok_or_else(|| {
                        CliError::Spec(format!("iota: unknown feature {feature:?}"))
                    })?);
                }
                let iota = map
                    .iter()
                    .enumerate()
                    .map(|(c, i)| {
                        i.ok_or_else(|| {
                            CliError::Spec(format!(
                                "iota: no clue for hypothesis {:?}",
                                self.space.label(c + 1)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                pdf_projection_matrix(&iota, n)
            }
            WeightSpec::Explicit { matrix } => {
                let mut columns = vec![None; m];
                for (label, col) in matrix {
                    let c = self.column_index(label, "weights")?;
                    columns[c] = Some(self.weight_vector(col, &format!("weights/{label}"))?);
                }
                let columns = columns
                    .into_iter()
                    .enumerate()
                    .map(|(c, col)| {
                        col.ok_or_else(|| {
                            CliError::Spec(format!(
                                "weights: no column for hypothesis {:?}",
                                self.space.label(c + 1)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                WeightMatrix::from_columns(columns)
            }
        };
        w.map_err(spec_err("weights"))
    }

    /// Resolves an observation object `{feature: symbol, conditioners?: {feature: symbol}}`.
    pub fn observation(&self, value: &serde_json::Value) -> Result<CluesObservation> {
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::Observation("expected a JSON object".into()))?;
        let conditioners = match obj.get("conditioners") {
            None => serde_json::Map::new(),
            Some(serde_json::Value::Object(m)) => m.clone(),
            Some(_) => {
                return Err(CliError::Observation(
                    "\"conditioners\" must be an object".into(),
                ))
            }
        };
        for key in obj.keys().filter(|k| *k != "conditioners") {
            if self.feature_index(key).is_none() {
                return Err(CliError::Observation(format!("unknown feature {key:?}")));
            }
        }
        for key in conditioners.keys() {
            match self.feature_index(key) {
                Some(i) if self.models[i].is_conditional() => {}
                Some(_) => {
                    return Err(CliError::Observation(format!(
                        "feature {key:?} is not conditional"
                    )))
                }
                None => return Err(CliError::Observation(format!("unknown feature {key:?}"))),
            }
        }
        let text = |v: &serde_json::Value, what: &str| -> Result<String> {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| CliError::Observation(format!("{what} must be a string")))
        };
        let values = self
            .models
            .iter()
            .map(|model| {
                let name = model.name();
                let v = obj
                    .get(name)
                    .ok_or_else(|| CliError::Observation(format!("missing feature {name:?}")))?;
                let symbol = model.alphabet().require(&text(v, name)?, name)?;
                let conditioner = match model.conditioning_alphabet() {
                    None => None,
                    Some(a) => {
                        let c = conditioners.get(name).ok_or_else(|| {
                            CliError::Observation(format!("missing conditioner for {name:?}"))
                        })?;
                        Some(a.require(&text(c, name)?, name)?)
                    }
                };
                Ok(ClueValue {
                    symbol,
                    conditioner,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CluesObservation::new(values))
    }
}

fn feature_model(
    f: &FeatureSpec,
    space: &HypothesisSpace,
    nuisance: Option<&NuisancePrior>,
) -> Result<FeatureModel> {
    let context = format!("feature {}", f.name);
    let z = alphabet(&f.alphabet, &context)?;
    let cond = f
        .conditioning_alphabet
        .as_ref()
        .map(|c| alphabet(c, &context))
        .transpose()?;
    let grid = nuisance.map(|n| n.grid().clone());
    let mut levels: Vec<&[String]> = vec![space.labels().symbols()];
    if let Some(g) = &grid {
        levels.push(g.symbols());
    }
    if let Some(c) = &cond {
        levels.push(c.symbols());
    }
    let rows = f
        .table
        .rows(&levels, &context)?
        .iter()
        .map(|r| FiniteDistribution::from_probs(z.clone(), r))
        .collect::<sclkit::Result<Vec<_>>>()
        .map_err(spec_err(&context))?;
    FeatureModel::new(f.name.clone(), z, space.len(), grid, cond, rows).map_err(spec_err(&context))
}

// Symbols of a map in order of first appearance over the data alphabet,
// unless given explicitly.
fn map_alphabet(
    given: Option<&Vec<String>>,
    map: &BTreeMap<String, String>,
    y: &Alphabet,
    context: &str,
) -> Result<(Alphabet, Vec<usize>)> {
    if let Some(extra) = map.keys().find(|k| y.index_of(k).is_none()) {
        return Err(CliError::Spec(format!("{context}: unknown data symbol {extra:?}")));
    }
    let values = y
        .symbols()
        .iter()
        .map(|s| {
            map.get(s)
                .cloned()
                .ok_or_else(|| CliError::Spec(format!("{context}: no value for data symbol {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let symbols = match given {
        Some(a) => a.clone(),
        None => {
            let mut seen: Vec<String> = Vec::new();
            for v in &values {
                if !seen.contains(v) {
                    seen.push(v.clone());
                }
            }
            seen
        }
    };
    let a = alphabet(&symbols, context)?;
    let indices = values
        .iter()
        .map(|v| a.require(v, context).map_err(spec_err(context)))
        .collect::<Result<Vec<_>>>()?;
    Ok((a, indices))
}

fn build_oracle(
    o: &OracleSpec,
    space: &HypothesisSpace,
    prior: &FiniteDistribution,
    nuisance: Option<NuisancePrior>,
) -> Result<GenerativeOracle> {
    let y = alphabet(&o.y_alphabet, "oracle data alphabet")?;
    let mut levels: Vec<&[String]> = vec![space.labels().symbols()];
    if let Some(n) = &nuisance {
        levels.push(n.grid().symbols());
    }
    let likelihood = o
        .likelihood
        .rows(&levels, "oracle likelihood")?
        .iter()
        .map(|r| FiniteDistribution::from_probs(y.clone(), r))
        .collect::<sclkit::Result<Vec<_>>>()
        .map_err(spec_err("oracle likelihood"))?;
    let features = o
        .features
        .iter()
        .map(|f| {
            let context = format!("oracle feature {}", f.name);
            let (a, map) = map_alphabet(f.alphabet.as_ref(), &f.map, &y, &context)?;
            let fm = FeatureMap::new(f.name.clone(), a, map).map_err(spec_err(&context))?;
            match &f.conditioning_map {
                None if f.conditioning_alphabet.is_some() => Err(CliError::Spec(format!(
                    "{context}: conditioning alphabet without a conditioning map"
                ))),
                None => Ok(fm),
                Some(cm) => {
                    let (ca, cmap) = map_alphabet(f.conditioning_alphabet.as_ref(), cm, &y, &context)?;
                    fm.with_conditioning(ca, cmap).map_err(spec_err(&context))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GenerativeOracle::new(space.clone(), y, prior.clone(), likelihood, features, nuisance)
        .map_err(spec_err("oracle"))
}

fn probs_by_label(d: &FiniteDistribution) -> BTreeMap<String, f64> {
    d.alphabet()
        .symbols()
        .iter()
        .cloned()
        .zip(d.probs())
        .collect()
}

fn symbol_map(y: &Alphabet, a: &Alphabet, map: &[usize]) -> BTreeMap<String, String> {
    map.iter()
        .enumerate()
        .map(|(yi, z)| (y.symbol(yi).to_string(), a.symbol(*z).to_string()))
        .collect()
}

impl ProblemSpec {
    /// Spec text for an oracle, with the reference listed first.
    pub fn from_oracle(oracle: &GenerativeOracle) -> Self {
        let space = oracle.space();
        let y = oracle.y_alphabet();
        let row = |theta: usize, psi: Option<usize>| {
            Table::Row(oracle.likelihood(theta, psi).expect("valid indices").probs())
        };
        let likelihood = Table::Branch(
            (0..space.len())
                .map(|t| {
                    let entry = match oracle.nuisance() {
                        None => row(t, None),
                        Some(n) => Table::Branch(
                            (0..n.len())
                                .map(|k| (n.grid().symbol(k).to_string(), row(t, Some(k))))
                                .collect(),
                        ),
                    };
                    (space.label(t).to_string(), entry)
                })
                .collect(),
        );
        let features = oracle
            .features()
            .iter()
            .map(|f| OracleFeatureSpec {
                name: f.name().to_string(),
                alphabet: Some(f.alphabet().symbols().to_vec()),
                map: symbol_map(y, f.alphabet(), f.map()),
                conditioning_alphabet: f.conditioning().map(|(a, _)| a.symbols().to_vec()),
                conditioning_map: f.conditioning().map(|(a, m)| symbol_map(y, a, m)),
            })
            .collect();
        ProblemSpec {
            hypotheses: space.labels().symbols().to_vec(),
            reference: space.label(0).to_string(),
            prior: Some(probs_by_label(oracle.prior())),
            features: None,
            oracle: Some(OracleSpec {
                y_alphabet: y.symbols().to_vec(),
                likelihood,
                features,
            }),
            nuisance: oracle.nuisance().map(|n| NuisanceSpec {
                grid: n.grid().symbols().to_vec(),
                prior: Some(probs_by_label(n.distribution())),
            }),
            weights: None,
        }
    }
}
