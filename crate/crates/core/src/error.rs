use thiserror::Error;

use crate::fock::ModeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode register is empty")]
    EmptyRegister,
    #[error("mode {0} is not in the register")]
    UnknownMode(ModeId),
    #[error("mode {0} appears more than once")]
    DuplicateMode(ModeId),
    #[error("registers overlap on mode {0}")]
    OverlappingRegisters(ModeId),
    #[error("registers do not hold the same modes")]
    RegisterMismatch,
    #[error("photon number {found} exceeds the cap of {cap}")]
    PhotonCap { found: usize, cap: usize },
    #[error("transform is not an isometry (max deviation {0:e})")]
    NotIsometric(f64),
    #[error("output mode {0} is already occupied")]
    OccupiedOutput(ModeId),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("state is not normalized (norm squared {0})")]
    Unnormalized(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical contract violated: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
