//! Per-clue sampling models `p(z_i | theta [, psi] [, z_i^c])`.

use crate::distribution::{Alphabet, FiniteDistribution};
use crate::error::{Error, Result};

/// Largest feature alphabet accepted.
pub const MAX_FEATURE_ALPHABET: usize = 256;
/// Largest nuisance grid accepted.
pub const MAX_NUISANCE_GRID: usize = 64;

/// Sampling table of one clue. Rows are indexed by hypothesis, then by
/// nuisance value (if the model is parametric), then by conditioning symbol
/// (if the model is conditional).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureModel {
    name: String,
    alphabet: Alphabet,
    conditioning: Option<Alphabet>,
    nuisance: Option<Alphabet>,
    hypotheses: usize,
    table: Vec<FiniteDistribution>,
}

impl FeatureModel {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        hypotheses: usize,
        nuisance: Option<Alphabet>,
        conditioning: Option<Alphabet>,
        table: Vec<FiniteDistribution>,
    ) -> Result<Self> {
        let name = name.into();
        if alphabet.len() > MAX_FEATURE_ALPHABET {
            return Err(Error::CapExceeded {
                what: "feature alphabet size",
                value: alphabet.len(),
                limit: MAX_FEATURE_ALPHABET,
            });
        }
        if let Some(grid) = &nuisance {
            if grid.len() > MAX_NUISANCE_GRID {
                return Err(Error::CapExceeded {
                    what: "nuisance grid size",
                    value: grid.len(),
                    limit: MAX_NUISANCE_GRID,
                });
            }
        }
        let rows = hypotheses
            * nuisance.as_ref().map_or(1, Alphabet::len)
            * conditioning.as_ref().map_or(1, Alphabet::len);
        if table.len() != rows {
            return Err(Error::InvalidModel(format!(
                "feature {name}: table has {} rows, expected {rows}",
                table.len()
            )));
        }
        if table.iter().any(|d| *d.alphabet() != alphabet) {
            return Err(Error::InvalidModel(format!(
                "feature {name}: table row over the wrong alphabet"
            )));
        }
        Ok(FeatureModel {
            name,
            alphabet,
            conditioning,
            nuisance,
            hypotheses,
            table,
        })
    }

    /// Plain model with one probability row per hypothesis.
    pub fn unconditional(
        name: impl Into<String>,
        alphabet: Alphabet,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        let table = rows
            .iter()
            .map(|r| FiniteDistribution::from_probs(alphabet.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, alphabet, rows.len(), None, None, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn conditioning_alphabet(&self) -> Option<&Alphabet> {
        self.conditioning.as_ref()
    }

    pub fn nuisance_grid(&self) -> Option<&Alphabet> {
        self.nuisance.as_ref()
    }

    pub fn hypothesis_count(&self) -> usize {
        self.hypotheses
    }

    pub fn is_conditional(&self) -> bool {
        self.conditioning.is_some()
    }

    pub fn is_parametric(&self) -> bool {
        self.nuisance.is_some()
    }

    /// The row `p(. | theta [, psi] [, c])`. A nuisance index passed to a
    /// non-parametric model is ignored, as is a conditioner passed to an
    /// unconditional one.
    pub fn distribution(
        &self,
        theta: usize,
        psi: Option<usize>,
        conditioner: Option<usize>,
    ) -> Result<&FiniteDistribution> {
        if theta >= self.hypotheses {
            return Err(Error::IndexOutOfRange {
                index: theta,
                size: self.hypotheses,
                context: format!("hypotheses of feature {}", self.name),
            });
        }
        let mut slot = theta;
        if let Some(grid) = &self.nuisance {
            let psi = psi.ok_or_else(|| Error::MissingNuisance {
                feature: self.name.clone(),
            })?;
            if psi >= grid.len() {
                return Err(Error::IndexOutOfRange {
                    index: psi,
                    size: grid.len(),
                    context: format!("nuisance grid of feature {}", self.name),
                });
            }
            slot = slot * grid.len() + psi;
        }
        if let Some(cond) = &self.conditioning {
            let c = conditioner.ok_or_else(|| Error::MissingConditioner {
                feature: self.name.clone(),
            })?;
            if c >= cond.len() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    size: cond.len(),
                    context: format!("conditioning alphabet of feature {}", self.name),
                });
            }
            slot = slot * cond.len() + c;
        }
        Ok(&self.table[slot])
    }

    /// `log p(z = symbol | theta [, psi] [, c])`.
    pub fn log_prob(
        &self,
        theta: usize,
        symbol: usize,
        psi: Option<usize>,
        conditioner: Option<usize>,
    ) -> Result<f64> {
        if symbol >= self.alphabet.len() {
            return Err(Error::IndexOutOfRange {
                index: symbol,
                size: self.alphabet.len(),
                context: format!("alphabet of feature {}", self.name),
            });
        }
        Ok(self.distribution(theta, psi, conditioner)?.log_prob(symbol))
    }
}
