use crate::ids::{CellId, UserId};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown cell {0}")]
    UnknownCell(CellId),
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown scenario {0} (expected 1, 2 or 3)")]
    UnknownScenario(u8),
    #[error("degree of asymmetry {doa} outside [{min}, 1]")]
    DoaOutOfRange { doa: f64, min: f64 },
    #[error("no feasible backhaul route to {0}")]
    RouteNotFound(CellId),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("oracle search space {outcomes} exceeds budget {budget}")]
    OracleBudget { outcomes: f64, budget: u64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
