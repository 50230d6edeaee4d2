use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Recoverable failures raised by the numeric kernel, the models and the
/// simulation drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Observed data is incompatible with the selection event.
    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    /// A numerical routine failed to converge or hit an unstable evaluation.
    #[error("numeric failure in {routine}: {detail}")]
    Numeric { routine: &'static str, detail: String },

    /// The posterior normaliser kept growing as the grid was expanded.
    #[error("posterior appears non-integrable: {0}")]
    DivergedPosterior(String),

    /// Rejection sampling could not reach the requested count.
    #[error(
        "selection probability too low for rejection sampling: \
         accepted {accepted} of {attempts} attempts (rate {rate:.3e}, floor {floor:.1e})"
    )]
    LowAcceptance {
        accepted: usize,
        attempts: usize,
        rate: f64,
        floor: f64,
    },

    /// A Monte Carlo estimate had no usable samples.
    #[error("degenerate Monte Carlo estimate: {0}")]
    DegenerateEstimate(String),

    /// A Metropolis-Hastings chain rejected every proposal over a full
    /// adaptation window.
    #[error("Metropolis-Hastings chain stuck: {0}")]
    StuckChain(String),

    /// Invalid configuration of a model, sampler or study.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn numeric(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            routine,
            detail: detail.into(),
        }
    }
}
