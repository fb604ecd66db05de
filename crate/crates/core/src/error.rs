use thiserror::Error;

/// Errors produced by the simulation and verification toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A coefficient became non-finite or exceeded the blow-up threshold.
    #[error("blow-up in component `{component}` at t = {t}: mode {mode} has value {value}")]
    BlowUp {
        component: &'static str,
        t: f64,
        mode: usize,
        value: f64,
    },

    /// The admissible range for some derived constant is empty.
    #[error("no certificate: {bound}")]
    NoCertificate { bound: String },

    /// Adaptive step size fell below the representable minimum.
    #[error("stiffness: step size {step} underflowed at t = {t}")]
    Stiffness { t: f64, step: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Some members of an ensemble failed; the survivors are listed by index.
    #[error("{} of {} ensemble members failed (first: {first_error})", failed.len(), failed.len() + survivors.len())]
    PartialFailure {
        survivors: Vec<usize>,
        failed: Vec<usize>,
        first_error: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for blow-up failures, including ensembles where a member blew up.
    pub fn is_blow_up(&self) -> bool {
        match self {
            Error::BlowUp { .. } => true,
            Error::PartialFailure { first_error, .. } => first_error.starts_with("blow-up"),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
