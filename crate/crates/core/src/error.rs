use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("every entry has zero probability mass")]
    AllZeroMass,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid hypothesis space: {0}")]
    InvalidHypothesisSpace(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("weight vector has length {got}, expected {expected}")]
    WeightDimensionMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid feature model: {0}")]
    InvalidModel(String),
    #[error("feature {feature} is conditional but no conditioning value was given")]
    MissingConditioner { feature: String },
    #[error("feature {feature} depends on a nuisance parameter but none was given")]
    MissingNuisance { feature: String },
    #[error("symbol {symbol:?} is not in the alphabet of {context}")]
    SymbolNotInAlphabet { symbol: String, context: String },
    #[error("index {index} out of range (size {size}) for {context}")]
    IndexOutOfRange {
        index: usize,
        size: usize,
        context: String,
    },
    #[error("likelihood ratio 0/0 for hypothesis {hypothesis} through feature {feature}")]
    IndeterminateRatio { hypothesis: usize, feature: usize },
    #[error("prior probability of the reference hypothesis is zero")]
    ReferencePriorZero,
    #[error("likelihood of the data under the reference hypothesis is zero")]
    ReferenceLikelihoodZero,
    #[error("composite evidence of the reference hypothesis is zero for column {column}")]
    ReferenceEvidenceZero { column: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("conditioning slice {conditioner} of feature {feature} has zero probability")]
    EmptyConditioningSet { feature: usize, conditioner: usize },
    #[error("observed data has zero marginal probability")]
    ZeroMarginalData,
    #[error("{what} = {value} exceeds the limit of {limit}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of the input data or model description, as opposed
    /// to arithmetic failures on otherwise valid input.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::AllZeroMass
                | Error::IndeterminateRatio { .. }
                | Error::ReferencePriorZero
                | Error::ReferenceLikelihoodZero
                | Error::ReferenceEvidenceZero { .. }
                | Error::EmptyConditioningSet { .. }
                | Error::ZeroMarginalData
        )
    }
}
