//! Command implementations behind the `katlas` binary, exposed as a library
//! so the exit-code contracts can be exercised directly from tests.

pub mod commands;
pub mod config;

/// Exit status contract: 0 success, 1 domain failure (failed assumptions,
/// nonexistence, verification failure), 2 usage or I/O failure.
#[derive(Debug)]
pub enum CmdError {
    Domain(String),
    Usage(String),
}

impl CmdError {
    pub fn code(&self) -> i32 {
        match self {
            CmdError::Domain(_) => 1,
            CmdError::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Domain(m) | CmdError::Usage(m) => m,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

pub type CmdResult = Result<(), CmdError>;

pub fn exit_code(result: &CmdResult) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => e.code(),
    }
}
