use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Every variant that rejects an input names the violated condition so the
/// CLI can surface it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite integrand value {value} at x = {x}")]
    NonFiniteIntegrand { x: f64, value: f64 },

    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    QuadratureBudget {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("unsupported integrand class: {0}")]
    Unsupported(String),

    #[error("negative Stieltjes weight {value} at r = {r}: nu_p^(1/(1-p)) must be non-increasing")]
    NegativeWeight { r: f64, value: f64 },

    #[error("domain parameter violates {condition}: {detail}")]
    DomainCondition { condition: String, detail: String },

    #[error("incompatible datum: |int A f| / int A |f| = {residual:e} exceeds {tolerance:e} (compatibility condition int f = 0)")]
    Incompatible { residual: f64, tolerance: f64 },

    #[error("parameters outside the covered cases: {0}")]
    CaseTable(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(condition: &str, detail: impl Into<String>) -> Self {
        Error::DomainCondition {
            condition: condition.to_string(),
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
