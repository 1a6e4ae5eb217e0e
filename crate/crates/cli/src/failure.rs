use std::fmt::Display;

pub const PIPELINE: u8 = 1;
pub const NO_MATCH: u8 = 2;
pub const REJECTED: u8 = 3;
pub const CONFIG: u8 = 64;

/// Process exit code, with the error to report if there is one.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: Option<anyhow::Error>,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure { code, error: Some(error.into()) }
    }

    pub fn msg(code: u8, message: impl Display + Send + Sync + 'static) -> Self {
        Failure { code, error: Some(anyhow::anyhow!("{message}")) }
    }

    /// Exit with `code` after output that already explains why.
    pub fn quiet(code: u8) -> Self {
        Failure { code, error: None }
    }
}

pub trait OrExit<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(code, e))
    }
}
