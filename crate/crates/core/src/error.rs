use thiserror::Error;

use crate::group::Group;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("element {element} does not belong to {group}")]
    GroupMismatch { group: Group, element: String },

    #[error("cannot parse element: {0}")]
    InvalidElement(String),

    #[error("ball of radius {radius} has {} elements, above the cap of {cap}", size.map_or_else(|| "too many".to_string(), |s| s.to_string()))]
    BallCapExceeded {
        radius: u64,
        size: Option<u128>,
        cap: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("multiplier has no finite decay certificate: {0}")]
    MissingCertificate(String),

    #[error("kernel matrix: {0}")]
    InvalidKernel(String),

    #[error("grid schedule is empty")]
    EmptySchedule,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
