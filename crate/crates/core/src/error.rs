use thiserror::Error;

use crate::dsl::ParseDiagnostic;
use crate::network::NetDiagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot decode polarization state: {0}")]
    Decoding(String),

    #[error("netlist failed validation with {} diagnostic(s)", .0.len())]
    Structural(Vec<NetDiagnostic>),

    #[error("netlist text has {} diagnostic(s)", .0.len())]
    Parse(Vec<ParseDiagnostic>),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
