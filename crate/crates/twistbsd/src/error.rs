use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("singular curve: discriminant is zero")]
    SingularCurve,
    #[error("{0} is not squarefree")]
    NotSquarefree(String),
    #[error("curve has no rational point of order 2")]
    NoRationalTwoTorsion,
    #[error("{0} has bad reduction")]
    BadReduction(String),
    #[error("{0} is not prime")]
    CompositeModulus(String),
    #[error("prime {0} divides 2N")]
    DividesLevel(String),
    #[error("{0} is not a valid Heegner prime: {1}")]
    InvalidHeegnerPrime(String, String),
    #[error("{0} is not admissible")]
    NotAdmissible(String),
    #[error("prime {0} listed twice")]
    DuplicatePrime(String),
    #[error("precision unreachable: {0}")]
    PrecisionUnreachable(String),
    #[error("root number is +1, L'(E,1) is not the leading term")]
    WrongSign,
    #[error("root number inconclusive at this precision")]
    Inconclusive,
    #[error("no rational number within tolerance")]
    NoConvergent,
    #[error("period ratio {0} is neither 1 nor 1/2")]
    UnexpectedRatio(String),
    #[error("{0} is not a negative discriminant")]
    NotADiscriminant(String),
    #[error("Heegner hypothesis fails: {0}")]
    HeegnerHypothesisFails(String),
    #[error("{0} has no square root modulo 4N")]
    NoSquareRootOfDisc(String),
    #[error("series truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("rational reconstruction failed: {0}")]
    RecognitionFailed(String),
    #[error("generator search failed: {0}")]
    GeneratorSearchFailed(String),
    #[error("curve does not have analytic rank one")]
    NotRankOne,
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("prediction mismatch: {0}")]
    PredictionMismatch(String),
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("curve {0} is singular")]
    SingularRecord(String),
    #[error("unknown curve {0}")]
    UnknownCurve(String),
    #[error("point is not on the curve")]
    NotOnCurve,
}

pub type Result<T> = std::result::Result<T, Error>;
