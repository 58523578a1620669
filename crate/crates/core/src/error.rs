use thiserror::Error;

use crate::tropgraph::Slope;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("balancing fails at vertex {0}")]
    Unbalanced(usize),
    #[error("edge {edge} has nonzero slope {slope} and cannot be contracted")]
    NonZeroContraction { edge: usize, slope: Slope },
    #[error("not floor decomposed: {what} has slope {slope}")]
    NotFloorDecomposed { what: String, slope: Slope },
    #[error("not a simple wall: {0}")]
    NotAWall(String),
    #[error("scale bound exceeded: {0}")]
    ScaleRefused(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("walk failure: {0}")]
    Walk(String),
}

pub type Result<T> = std::result::Result<T, Error>;
