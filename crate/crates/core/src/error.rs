use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KlscError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("quadrature tolerance not met (estimated error {achieved:e}, requested {requested:e})")]
    ToleranceNotMet { achieved: f64, requested: f64 },
    #[error("not a Kahler potential derivative: {0}")]
    NotKahler(String),
    #[error("degenerate metric at z = {z}")]
    DegenerateMetric { z: f64 },
    #[error("conformal factor is not positive at z = {z}")]
    NonPositiveConformalFactor { z: f64 },
    #[error("antiderivative changes sign more than once: zeros near {zeros:?}")]
    MultipleZeros { zeros: Vec<f64> },
    #[error("pair is not admissible: violation at z = {z}")]
    NotAdmissible { z: f64 },
    #[error("not smooth at zero: {0}")]
    NotSmoothAtZero(String),
    #[error("series coefficient is not rational: {0}")]
    NotRational(String),
    #[error("all Taylor coefficients below order {order} vanish")]
    AllCoefficientsZero { order: u32 },
    #[error("truncation order insufficient: {0}")]
    TruncationInsufficient(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, KlscError>;
