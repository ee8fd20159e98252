//! Command-line front end for the `boolnl` library.
//!
//! Four subcommands: `analyze` (operator landscape studies), `search`
//! (genetic algorithm and local-search experiments), `reproduce` (rebuild a
//! bundled reference table and diff against it), and `census` (nonlinearity
//! distribution). Every invocation writes its primary artifacts plus a
//! `.meta.json` sidecar; primary artifacts are byte-identical across
//! repeated invocations with the same flags and seed.
//!
//! Exit codes: 0 on success, 1 on usage or execution errors, 2 when a
//! reproduction deviates from its reference table.

use std::fmt;
use std::path::PathBuf;

pub mod args;
pub mod exec;
pub mod golden;
pub mod grid;
pub mod render;

pub use args::Cli;
pub use exec::execute;

#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination or value; mapped to exit code 1.
    Usage(String),
    /// Filesystem failure; exit code 1.
    Io(PathBuf, std::io::Error),
    /// Library-level failure (invalid plan, config, …); exit code 1.
    Core(boolnl::Error),
    /// Result serialization failure; exit code 1.
    Serialize(String),
    /// A reproduction deviated from its reference table; exit code 2.
    Diff { table: u8, deviations: usize },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(path, err) => write!(f, "{}: {err}", path.display()),
            CliError::Core(err) => write!(f, "{err}"),
            CliError::Serialize(msg) => write!(f, "could not serialize results: {msg}"),
            CliError::Diff { table, deviations } => write!(
                f,
                "reproduction of table {table} deviates from the reference in {deviations} cell(s)"
            ),
        }
    }
}

impl std::error::Error for CliError {}

impl From<boolnl::Error> for CliError {
    fn from(err: boolnl::Error) -> Self {
        CliError::Core(err)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Diff { .. } => 2,
            _ => 1,
        }
    }
}
