use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {what} = {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
    #[error("site index {index} out of range for {size} sites")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("squeezing parameter undefined: <J_z> = {jz:e}")]
    UndefinedSqueezing { jz: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
