use crate::distribution::Alphabet;
use crate::error::{Error, Result};

/// Largest hypothesis space accepted anywhere in the crate.
pub const MAX_HYPOTHESES: usize = 64;

/// A finite hypothesis set `{theta_0, ..., theta_m}`. Index 0 is always the
/// reference (null) hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisSpace {
    labels: Alphabet,
}

impl HypothesisSpace {
    /// The first label becomes the reference.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = Alphabet::new(labels)
            .map_err(|e| Error::InvalidHypothesisSpace(e.to_string()))?;
        if labels.len() < 2 {
            return Err(Error::InvalidHypothesisSpace(
                "at least two hypotheses are required".into(),
            ));
        }
        if labels.len() > MAX_HYPOTHESES {
            return Err(Error::CapExceeded {
                what: "hypothesis count",
                value: labels.len(),
                limit: MAX_HYPOTHESES,
            });
        }
        Ok(HypothesisSpace { labels })
    }

    /// Moves `reference` to index 0 and keeps the others in their given order.
    /// Returns the space and, for every input position, its new index.
    pub fn with_reference(labels: &[String], reference: &str) -> Result<(Self, Vec<usize>)> {
        let r = labels.iter().position(|l| l == reference).ok_or_else(|| {
            Error::InvalidHypothesisSpace(format!("reference {reference:?} is not a hypothesis"))
        })?;
        let mut order = vec![r];
        order.extend((0..labels.len()).filter(|i| *i != r));
        let space = Self::new(order.iter().map(|i| labels[*i].clone()))?;
        let mut remap = vec![0; labels.len()];
        for (new, old) in order.iter().enumerate() {
            remap[*old] = new;
        }
        Ok((space, remap))
    }

    /// Hypotheses `h0 .. h{count-1}`.
    pub fn indexed(count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| format!("h{i}")))
    }

    /// Total number of hypotheses, `m + 1`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of non-reference hypotheses.
    pub fn m(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn label(&self, index: usize) -> &str {
        self.labels.symbol(index)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.index_of(label)
    }

    pub fn labels(&self) -> &Alphabet {
        &self.labels
    }
}
