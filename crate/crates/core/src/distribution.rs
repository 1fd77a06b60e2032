//! Finite categorical distributions stored in the natural-log domain.
//!
//! Zero probabilities are represented by `f64::NEG_INFINITY`. Divergences and
//! expected log-ratios follow the usual conventions: `0 * log(0 / q) = 0`, and
//! `p > 0, q = 0` gives `+inf`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance on the unit-sum constraint for user-supplied numbers.
pub const INPUT_TOL: f64 = 1e-9;
/// Tolerance on the unit-sum constraint for internally computed results.
pub const OUTPUT_TOL: f64 = 1e-10;

/// An ordered set of distinct symbol names, cheap to clone.
#[derive(Clone)]
pub struct Alphabet(Arc<[String]>);

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate symbol {s:?}"
                )));
            }
        }
        Ok(Alphabet(symbols.into()))
    }

    /// Symbols `prefix0 .. prefix{n-1}`.
    pub fn indexed(prefix: &str, n: usize) -> Self {
        assert!(n > 0, "indexed alphabet must be non-empty");
        Alphabet((0..n).map(|i| format!("{prefix}{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.0.iter().position(|s| s == symbol)
    }

    /// Looks up `symbol`, reporting `context` on failure.
    pub fn require(&self, symbol: &str, context: &str) -> Result<usize> {
        self.index_of(symbol).ok_or_else(|| Error::SymbolNotInAlphabet {
            symbol: symbol.to_string(),
            context: context.to_string(),
        })
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A categorical distribution over an [`Alphabet`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    alphabet: Alphabet,
    log_probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Builds a distribution from plain probabilities. The sum must be within
    /// [`INPUT_TOL`] of one; the stored values are renormalized exactly.
    pub fn from_probs(alphabet: Alphabet, probs: &[f64]) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for an alphabet of {} symbols",
                probs.len(),
                alphabet.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probability {bad} is not a finite non-negative number"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let log_probs = probs.iter().map(|p| (p / total).ln()).collect();
        Ok(FiniteDistribution {
            alphabet,
            log_probs,
        })
    }

    /// Builds a distribution from log-probabilities that already sum to one
    /// within [`OUTPUT_TOL`].
    pub fn from_log_probs(alphabet: Alphabet, log_probs: Vec<f64>) -> Result<Self> {
        if log_probs.len() != alphabet.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} log-probabilities for an alphabet of {} symbols",
                log_probs.len(),
                alphabet.len()
            )));
        }
        if log_probs.iter().any(|l| l.is_nan() || *l > 0.0) {
            return Err(Error::InvalidDistribution(
                "log-probabilities must be non-positive and not NaN".into(),
            ));
        }
        let total: f64 = log_probs.iter().map(|l| l.exp()).sum();
        if (total - 1.0).abs() > OUTPUT_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(FiniteDistribution {
            alphabet,
            log_probs,
        })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let l = -(alphabet.len() as f64).ln();
        let log_probs = vec![l; alphabet.len()];
        FiniteDistribution {
            alphabet,
            log_probs,
        }
    }

    pub fn point_mass(alphabet: Alphabet, index: usize) -> Result<Self> {
        if index >= alphabet.len() {
            return Err(Error::IndexOutOfRange {
                index,
                size: alphabet.len(),
                context: "point mass".into(),
            });
        }
        let mut log_probs = vec![f64::NEG_INFINITY; alphabet.len()];
        log_probs[index] = 0.0;
        Ok(FiniteDistribution {
            alphabet,
            log_probs,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_prob(&self, index: usize) -> f64 {
        self.log_probs[index]
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.log_probs[index].exp()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .log_probs
            .iter()
            .filter(|l| l.is_finite())
            .map(|l| l.exp() * l)
            .sum::<f64>()
    }

    /// First index of maximal probability.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, l) in self.log_probs.iter().enumerate() {
            if *l > self.log_probs[best] {
                best = i;
            }
        }
        best
    }

    /// Largest absolute difference between the probability vectors.
    pub fn max_abs_diff(&self, other: &FiniteDistribution) -> f64 {
        assert_eq!(self.len(), other.len(), "distributions differ in size");
        self.log_probs
            .iter()
            .zip(&other.log_probs)
            .map(|(a, b)| (a.exp() - b.exp()).abs())
            .fold(0.0, f64::max)
    }
}

/// Numerically stable `log(sum(exp(v)))`. Returns `-inf` for an empty or
/// all `-inf` input and `+inf` if any entry is `+inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Normalizes unnormalized log-masses into a distribution by max-shift.
///
/// Entries equal to `+inf` dominate: the result is then uniform over them.
pub fn normalize_log(alphabet: Alphabet, log_values: &[f64]) -> Result<FiniteDistribution> {
    if log_values.len() != alphabet.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} log-values for {} symbols",
            log_values.len(),
            alphabet.len()
        )));
    }
    if log_values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidDistribution("NaN log-mass".into()));
    }
    let infinite = log_values.iter().filter(|v| **v == f64::INFINITY).count();
    let log_probs = if infinite > 0 {
        let l = -(infinite as f64).ln();
        log_values
            .iter()
            .map(|v| if *v == f64::INFINITY { l } else { f64::NEG_INFINITY })
            .collect()
    } else {
        let max = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::AllZeroMass);
        }
        let log_total = log_values.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        log_values.iter().map(|v| (v - max) - log_total).collect()
    };
    Ok(FiniteDistribution {
        alphabet,
        log_probs,
    })
}

/// True iff every entry is at least `-tol` and the sum is within `tol` of one.
pub fn validate_simplex(v: &[f64], tol: f64) -> bool {
    !v.is_empty()
        && v.iter().all(|x| x.is_finite() && *x >= -tol)
        && (v.iter().sum::<f64>() - 1.0).abs() <= tol
}

/// Kullback-Leibler divergence `D(p || q)` in nats.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    if p.alphabet != q.alphabet {
        return Err(Error::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            p.alphabet, q.alphabet
        )));
    }
    let mut total = 0.0;
    for (lp, lq) in p.log_probs.iter().zip(&q.log_probs) {
        if *lp == f64::NEG_INFINITY {
            continue;
        }
        if *lq == f64::NEG_INFINITY {
            return Ok(f64::INFINITY);
        }
        total += lp.exp() * (lp - lq);
    }
    Ok(total.max(0.0))
}

/// `E_weights[log num / den]` over a shared alphabet.
///
/// Symbols with zero weight are skipped. Returns `None` when the expectation
/// is undefined: a `0/0` ratio at a weighted symbol, or both `+inf` and
/// `-inf` terms.
pub fn expected_log_ratio(
    weights: &FiniteDistribution,
    num: &FiniteDistribution,
    den: &FiniteDistribution,
) -> Option<f64> {
    debug_assert!(weights.len() == num.len() && num.len() == den.len());
    let (mut pos_inf, mut neg_inf) = (false, false);
    let mut total = 0.0;
    for ((lw, ln), ld) in weights
        .log_probs
        .iter()
        .zip(&num.log_probs)
        .zip(&den.log_probs)
    {
        if *lw == f64::NEG_INFINITY {
            continue;
        }
        match (*ln == f64::NEG_INFINITY, *ld == f64::NEG_INFINITY) {
            (true, true) => return None,
            (false, true) => pos_inf = true,
            (true, false) => neg_inf = true,
            (false, false) => total += lw.exp() * (ln - ld),
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => None,
        (true, false) => Some(f64::INFINITY),
        (false, true) => Some(f64::NEG_INFINITY),
        (false, false) => Some(total),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab(n: usize) -> Alphabet {
        Alphabet::indexed("s", n)
    }

    fn dist(p: &[f64]) -> FiniteDistribution {
        FiniteDistribution::from_probs(ab(p.len()), p).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&dist(&[0.3, 0.7]), &dist(&[0.3, 0.7])).unwrap(), 0.0);
        let d = kl_divergence(&dist(&[0.75, 0.25]), &dist(&[0.5, 0.5])).unwrap();
        assert!((d - 0.130812).abs() < 1e-6, "{d}");
        assert!((d - (0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln())).abs() < 1e-15);
        let d = kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(
            kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn kl_rejects_mismatched_alphabets() {
        let p = dist(&[0.5, 0.5]);
        let q = FiniteDistribution::uniform(Alphabet::new(["a", "b"]).unwrap());
        assert!(matches!(kl_divergence(&p, &q), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn simplex_examples() {
        assert!(validate_simplex(&[1.0], 1e-9));
        assert!(validate_simplex(&[0.5, 0.5, 0.0], 1e-9));
        assert!(!validate_simplex(&[0.6, 0.6], 1e-9));
        assert!(!validate_simplex(&[], 1e-9));
        assert!(!validate_simplex(&[1.5, -0.5], 1e-9));
    }

    #[test]
    fn normalize_log_examples() {
        let d = normalize_log(ab(2), &[0.0, 0.0]).unwrap();
        assert_eq!(d.probs(), vec![0.5, 0.5]);
        let d = normalize_log(ab(2), &[1f64.ln(), 3f64.ln()]).unwrap();
        assert!((d.prob(0) - 0.25).abs() < 1e-15 && (d.prob(1) - 0.75).abs() < 1e-15);
        let d = normalize_log(ab(2), &[-1000.0, -1001.0]).unwrap();
        let sigma = 1.0 / (1.0 + (-1f64).exp());
        assert!((d.prob(0) - sigma).abs() < 1e-14);
        assert!((d.prob(0) - 0.731058).abs() < 1e-6);
        assert!((d.prob(1) - 0.268941).abs() < 1e-6);
    }

    #[test]
    fn normalize_log_edge_cases() {
        assert_eq!(
            normalize_log(ab(2), &[f64::NEG_INFINITY; 2]),
            Err(Error::AllZeroMass)
        );
        let d = normalize_log(ab(3), &[f64::INFINITY, 0.0, f64::INFINITY]).unwrap();
        assert_eq!(d.probs(), vec![0.5, 0.0, 0.5]);
        assert!(normalize_log(ab(2), &[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn from_probs_validation() {
        assert!(FiniteDistribution::from_probs(ab(2), &[0.6, 0.6]).is_err());
        assert!(FiniteDistribution::from_probs(ab(2), &[1.5, -0.5]).is_err());
        assert!(FiniteDistribution::from_probs(ab(3), &[0.5, 0.5]).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
    }

    #[test]
    fn expected_log_ratio_conventions() {
        let w = dist(&[0.5, 0.5, 0.0]);
        let num = dist(&[0.2, 0.8, 0.0]);
        let den = dist(&[0.4, 0.4, 0.2]);
        let v = expected_log_ratio(&w, &num, &den).unwrap();
        assert!((v - (0.5 * 0.5f64.ln() + 0.5 * 2f64.ln())).abs() < 1e-15);
        let den0 = dist(&[1.0, 0.0, 0.0]);
        assert_eq!(expected_log_ratio(&w, &num, &den0), Some(f64::INFINITY));
        let num0 = dist(&[0.0, 0.0, 1.0]);
        let den00 = dist(&[0.0, 0.0, 1.0]);
        assert_eq!(expected_log_ratio(&w, &num0, &den00), None);
    }

    fn simplex_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn kl_is_non_negative((p, q) in (2usize..8).prop_flat_map(|n| (simplex_vec(n), simplex_vec(n)))) {
            let (p, q) = (dist(&p), dist(&q));
            let d = kl_divergence(&p, &q).unwrap();
            prop_assert!(d >= 0.0);
            if d == 0.0 {
                prop_assert!(p.max_abs_diff(&q) < 1e-12);
            }
            prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        }

        #[test]
        fn normalize_log_output_is_on_simplex(
            v in prop::collection::vec(-800.0f64..800.0, 1..10),
            shift in -500.0f64..500.0,
        ) {
            let n = v.len();
            let d = normalize_log(ab(n), &v).unwrap();
            prop_assert!(validate_simplex(&d.probs(), 1e-10));
            let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
            let e = normalize_log(ab(n), &shifted).unwrap();
            prop_assert!(d.max_abs_diff(&e) < 1e-12);
        }
    }
}
