use alloc::string::String;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition does not hold (e.g. an interval is too short).
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A table or buffer would exceed its configured capacity.
    #[error("capacity exceeded: requested {requested}, limit {limit}")]
    Capacity { requested: u64, limit: u64 },
    /// An iterative routine failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The maximising segment is horizontal: the orbit is already a closed
    /// horocycle of the given period.
    #[error("segment lies on a closed horocycle of period {period}")]
    DegeneratePeriodic { period: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! precondition {
    ($($arg:tt)*) => { $crate::error::Error::Precondition(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
pub(crate) use precondition;
