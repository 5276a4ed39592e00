use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter sequence is empty")]
    EmptySequence,

    #[error("sequence value {value} at index {index} lies outside declared bounds [{inf}, {sup}]")]
    SequenceBound {
        index: usize,
        value: f64,
        inf: f64,
        sup: f64,
    },

    #[error("history has length {got}, equation order is {expected}")]
    HistoryLength { expected: usize, got: usize },

    #[error("step {n}: history coordinate u_{coordinate} = {value} lies outside the domain")]
    DomainViolation {
        n: usize,
        coordinate: usize,
        value: f64,
    },

    #[error("term {index} = {value} left the domain")]
    DomainExit { index: usize, value: f64 },

    #[error("step {n}: map produced a non-finite value")]
    NonFinite { n: usize },

    #[error("index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("stride must be at least 1")]
    ZeroStride,

    #[error("criterion inapplicable: g(u) >= u arbitrarily close to 0 (probe u = {u:e})")]
    NotSublinear { u: f64 },

    #[error("bounding function is not finite at u = {u}")]
    NonFiniteBound { u: f64 },

    #[error("dominant lag mismatch: equation uses k = {equation}, bound uses k = {bound}")]
    LagMismatch { equation: usize, bound: usize },

    #[error("bound validation failed: {0}")]
    BoundValidation(String),

    #[error("{b} is not a fixed value of the equation (residual {residual:e})")]
    NotAFixedPoint { b: f64, residual: f64 },

    #[error("no solvability form: f_n cannot be solved for its second argument")]
    NoSolvabilityForm,

    #[error("step {n}: w = {w} is outside the range of f_n({u}, .)")]
    SigmaRange { n: usize, u: f64, w: f64 },

    #[error("system carries no envelope bounds")]
    MissingEnvelope,

    #[error("hypothesis {0} has not been established for this system")]
    HypothesisNotEstablished(&'static str),

    #[error("step {index}: logarithm of non-positive z = {value}")]
    NonPositiveLog { index: usize, value: f64 },

    #[error("descriptor cannot be built: {0}")]
    Descriptor(String),
}
