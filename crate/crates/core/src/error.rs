use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// The requested work exceeds a configured budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// A derived object (e.g. the scale subdivision) cannot be built.
    #[error("construction error: {0}")]
    Construction(String),
    /// Inputs that should have been derived from each other disagree.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

macro_rules! param_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Parameter(alloc::format!($($arg)*))
    };
}

pub(crate) use param_err;
