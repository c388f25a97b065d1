use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("ftd-integrability violated: {0}")]
    FtdIntegrability(String),

    #[error("infinite-variation kernel: use truncated ladder")]
    InfiniteVariation,

    #[error("tail undefined at origin")]
    TailAtOrigin,

    #[error("no finite stop-loss: kernel lacks first moment on ({0},inf)")]
    NoFiniteStopLoss(f64),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("degenerate grid")]
    DegenerateGrid,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("zero truncation: reference measure has infinite intensity")]
    ZeroTruncation,

    #[error("set touches the origin: infinite reference mass")]
    TouchesOrigin,

    #[error("compensation inequality fails at t={t}: {lhs} > {rhs}")]
    CompensationFails { t: f64, lhs: f64, rhs: f64 },

    #[error("hypothesis fails: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
