use alloc::string::String;

use crate::model::Violation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid payoff model: {0}")]
    InvalidModel(#[from] Violation),

    #[error("invalid tournament outcome: {0}")]
    InvalidOutcome(String),

    /// The requested quantity is outside the region where its formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Full enumeration would visit more outcomes than the configured cap.
    #[error("enumeration infeasible: {base}^{exponent} outcomes exceed the cap of {cap}")]
    Infeasible { base: u64, exponent: u64, cap: u64 },

    #[error("resource limit: support length {len} exceeds the cap of {cap}")]
    Resource { len: u64, cap: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
