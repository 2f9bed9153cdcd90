use thiserror::Error;

/// Errors raised by the library. Every variant carries a one-line message
/// naming the violated precondition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),
    #[error("invalid Mukai vector: {0}")]
    InvalidMukaiVector(String),
    #[error("invalid unit subgroup: {0}")]
    InvalidUnitGroup(String),
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("capacity exceeded: {what} needs {needed}, cap {cap} ({knob})")]
    Capacity {
        what: String,
        needed: String,
        cap: u64,
        knob: &'static str,
    },
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
