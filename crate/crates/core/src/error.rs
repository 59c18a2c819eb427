use thiserror::Error;

/// Errors raised by the library and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (non-finite coordinates, bad grids, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A construction violated its own invariants (overlapping Cantor children, ...).
    #[error("construction error: {0}")]
    Construction(String),

    /// A computation would exceed its configured budget.
    #[error("resource error: {what} requires {required}, budget is {budget}")]
    Resource {
        what: String,
        required: u128,
        budget: u128,
    },

    /// Parameter outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough usable data for a fit.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn resource(what: impl Into<String>, required: u128, budget: u128) -> Self {
        Error::Resource {
            what: what.into(),
            required,
            budget,
        }
    }

    /// Process exit status for the CLI: resource failures are 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
