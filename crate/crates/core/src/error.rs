use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("coupling `{name}` must be nonzero")]
    ZeroCoupling { name: &'static str },

    #[error("nu * kappa must be nonnegative (nu = {nu}, kappa = {kappa})")]
    SignViolation { nu: f64, kappa: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("positions must decrease strictly with gap >= {guard:e}: lambda[{index}] = {upper}, lambda[{next}] = {lower}", next = index + 1)]
    OrderingViolation {
        index: usize,
        upper: f64,
        lower: f64,
        guard: f64,
    },

    #[error("position lambda[{index}] = {value} is not positive (guard {guard:e})")]
    NonPositive { index: usize, value: f64, guard: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("empty coordinate vector")]
    EmptyVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("imaginary residual {imag:e} too large for real part {real:e}")]
    ImaginaryResidual { real: f64, imag: f64 },

    #[error("structural residual `{name}` = {value:e} exceeds {tolerance:e}")]
    StructuralResidual {
        name: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),

    #[error("nonpositive Lax eigenvalue {eigenvalue:e}")]
    PositivityViolation { eigenvalue: f64 },

    #[error("eigenvalues {large:e} and {small:e} do not pair multiplicatively (product {product:e})")]
    PairingFailure { large: f64, small: f64, product: f64 },

    #[error("degenerate action q = {q:e}: an eigenvalue pair sits at 1")]
    DegenerateAction { q: f64 },

    #[error("identity check failed: {0}")]
    IdentityFailure(String),

    #[error("trajectory left the Weyl chamber at t = {t}: {reason}")]
    ChamberExit {
        t: f64,
        reason: String,
        partial: Box<Trajectory>,
    },

    #[error("step size underflow at t = {t} (h = {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("impact parameters not stabilized: window difference {difference:e} > {tolerance:e}")]
    NotAsymptotic { difference: f64, tolerance: f64 },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroCoupling { .. } => "ZeroCoupling",
            Error::SignViolation { .. } => "SignViolation",
            Error::NonFinite(_) => "NonFinite",
            Error::OrderingViolation { .. } => "OrderingViolation",
            Error::NonPositive { .. } => "NonPositive",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptyVector => "EmptyVector",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Domain(_) => "DomainError",
            Error::ImaginaryResidual { .. } => "ImaginaryResidual",
            Error::StructuralResidual { .. } => "StructuralResidual",
            Error::EigensolverFailure(_) => "EigensolverFailure",
            Error::PositivityViolation { .. } => "PositivityViolation",
            Error::PairingFailure { .. } => "PairingFailure",
            Error::DegenerateAction { .. } => "DegenerateAction",
            Error::IdentityFailure(_) => "IdentityFailure",
            Error::ChamberExit { .. } => "ChamberExit",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::NotAsymptotic { .. } => "NotAsymptotic",
        }
    }
}
