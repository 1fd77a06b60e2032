use crate::distribution::{validate_simplex, INPUT_TOL};
use crate::error::{Error, Result};

/// The `n x m` super composite weight matrix. Column `c` holds the clue
/// weights used for hypothesis `c + 1` against the reference; the reference
/// itself carries no weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    columns: Vec<Vec<f64>>,
}

impl WeightMatrix {
    /// Each column must be non-negative and sum to one within [`INPUT_TOL`].
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || n == 0 {
            return Err(Error::InvalidWeights("empty weight matrix".into()));
        }
        for (c, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "weight column {c} has {} entries, expected {n}",
                    col.len()
                )));
            }
            if col.iter().any(|w| !w.is_finite() || *w < 0.0) || !validate_simplex(col, INPUT_TOL) {
                return Err(Error::InvalidWeights(format!(
                    "column {c} is not on the simplex: {col:?}"
                )));
            }
        }
        Ok(WeightMatrix { n, columns })
    }

    /// Every column equal to `w` (standard composite likelihood).
    pub fn constant(w: &[f64], m: usize) -> Result<Self> {
        Self::from_columns(vec![w.to_vec(); m])
    }

    /// Every entry `1 / n`.
    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        Self::from_columns(vec![vec![1.0 / n as f64; n]; m])
    }

    /// Number of clues.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of non-reference hypotheses.
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

    /// `w_i(theta)` for every clue; `None` for the reference hypothesis.
    pub fn weights_for(&self, theta: usize) -> Option<&[f64]> {
        theta.checked_sub(1).map(|c| self.columns[c].as_slice())
    }

    pub fn has_identical_columns(&self) -> bool {
        self.columns.iter().all(|c| *c == self.columns[0])
    }
}
