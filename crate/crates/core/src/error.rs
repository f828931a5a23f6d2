use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlphaError {
    #[error("alphabet must have at least 2 symbols (got {0})")]
    AlphabetTooSmall(usize),
    #[error("alpha must be a positive finite real (got {0})")]
    InvalidAlpha(f64),
    #[error("weight at symbol {index} is negative or non-finite ({value})")]
    BadWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, too far from 1 to renormalize")]
    NotNormalized { sum: f64 },
    #[error("constraint entry at symbol {index} is non-finite ({value})")]
    BadConstraint { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("supports are disjoint")]
    SingularPair,
    #[error("argument {0} is outside the domain (negative)")]
    NegativeArgument(f64),
    #[error("mixture weight {0} is outside [0, 1]")]
    BadMixtureWeight(f64),
    #[error("theta is inadmissible: positivity fails at symbol {index}")]
    InadmissibleTheta { index: usize },
    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),
    #[error("a required divergence term is infinite")]
    InfiniteTerm,
    #[error("measure is not in the family (constraint residual {residual:.3e})")]
    NotInFamily { residual: f64 },
    #[error("linear family has no probability-measure solutions")]
    Infeasible,
    #[error("did not converge within {iters} iterations")]
    NotConverged { iters: usize },
    #[error("alphabet size {size} exceeds the brute-force guard ({limit})")]
    TooLarge { size: usize, limit: usize },
    #[error("reference measure must have full support when alpha > 1")]
    ReferenceNotFullSupport,
    #[error("sample set is empty")]
    EmptySamples,
    #[error("sample index {index} out of range for alphabet of size {size}")]
    BadSampleIndex { index: usize, size: usize },
    #[error("sample file line {line} is not a symbol index")]
    MalformedSample { line: usize },
}

pub type Result<T> = std::result::Result<T, AlphaError>;
