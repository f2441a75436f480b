use thiserror::Error;

/// Failure modes of the exact-evolution pipeline.
///
/// Variants are grouped by the CLI exit-code contract: input errors map to
/// exit code 2, violated mathematical preconditions to 3, and exceeded
/// numerical tolerances to 4 (see [`SzegoError::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SzegoError {
    #[error("pole on or above real line: {0}")]
    PoleOnOrAboveRealLine(String),
    #[error("non-reduced fraction: numerator and denominator share the root {0}")]
    NonReducedFraction(String),
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("degree {0} exceeds the supported cap of {cap}", cap = crate::poly::DEGREE_CAP)]
    DegreeCap(usize),
    #[error("cannot project non-decaying function")]
    NonDecaying,
    #[error("non-integrable: {0}")]
    NonIntegrable(String),
    #[error("evaluation at pole {0}")]
    EvaluationAtPole(String),
    #[error("undefined for zero symbol")]
    ZeroSymbol,

    #[error("ill-conditioned range basis (condition number {0:.3e})")]
    IllConditionedBasis(f64),
    #[error("range leakage: residual {0:.3e}")]
    RangeLeakage(f64),
    #[error("numerically rank-deficient symbol: λ_min/λ_max = {0:.3e}")]
    RankDeficient(f64),
    #[error("conjugation basis failure: fixed subspace has dimension {found}, expected {expected}")]
    ConjugationBasis { expected: usize, found: usize },
    #[error("shift closure violated: residual {0:.3e}")]
    ShiftClosure(f64),
    #[error("chi undefined off M(N)_gen")]
    NotGeneric,
    #[error("soliton resolution needs strongly generic data")]
    NotStronglyGeneric,
    #[error("analysis specific to the double-eigenvalue M(2) scenario: {0}")]
    NotDoubleEigenvalue(String),
    #[error(
        "coordinates outside the admissible image: T has eigenvalue {0} with Im <= 0 \
         (either the coordinates are not in Ω or the reconstruction is ill-conditioned)"
    )]
    OutsideImage(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("resolvent solve failed: residual {0:.3e}")]
    ResolventSolve(f64),
    #[error("defective recovery: {0}")]
    DefectiveRecovery(String),
    #[error("box too small: {0}")]
    BoxTooSmall(String),
    #[error("blow-up or instability at t = {0}")]
    Instability(f64),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

impl SzegoError {
    /// Exit code under the CLI contract: 2 input error, 3 precondition
    /// violated, 4 tolerance exceeded.
    pub fn exit_code(&self) -> i32 {
        use SzegoError::*;
        match self {
            PoleOnOrAboveRealLine(_) | NonReducedFraction(_) | InvalidSymbol(_) | DegreeCap(_)
            | NonDecaying | NonIntegrable(_) | EvaluationAtPole(_) | ZeroSymbol => 2,
            IllConditionedBasis(_) | RankDeficient(_) | NotGeneric | NotStronglyGeneric
            | NotDoubleEigenvalue(_) | OutsideImage(_) | InsufficientSamples(_) | BoxTooSmall(_) => 3,
            RangeLeakage(_) | ConjugationBasis { .. } | ShiftClosure(_) | ResolventSolve(_)
            | DefectiveRecovery(_) | Instability(_) | LinearAlgebra(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, SzegoError>;
