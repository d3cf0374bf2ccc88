use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Vacuum density with nonzero momentum: kinetic energy is +inf.
    #[error("non-physical state: rho = {rho:e} with |m| = {momentum:e}")]
    NonPhysicalState { rho: f64, momentum: f64 },

    #[error("negative internal energy {internal:e} (rho = {rho:e})")]
    NegativeInternalEnergy { rho: f64, internal: f64 },

    #[error("inadmissible chi: {0}")]
    InadmissibleChi(String),

    #[error("unsupported dimension {0} (only 1 and 2 are supported)")]
    UnsupportedDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("solver blow-up at t = {time:e}: {detail}")]
    BlowUp { time: f64, detail: String },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("vacuum forms in the Riemann problem (pressure function has no positive root)")]
    VacuumFormation,

    #[error("singular gradient: vacuum at cell {cell}")]
    SingularGradient { cell: usize },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("empty coarse cell {0}")]
    EmptyCell(usize),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
