use std::path::PathBuf;

use thiserror::Error;

/// A numeric cell that could not be read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadCell {
    /// 1-based line in the file, header included.
    pub line: u64,
    pub column: String,
    pub value: String,
}

impl std::fmt::Display for BadCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {} column {:?}: {:?}", self.line, self.column, self.value)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("column not found: {0}")]
    ColumnNotFound(String),

    #[error("unparseable numeric cells ({} rows rejected): {}", rejected_rows(.0), list(.0))]
    ParseError(Vec<BadCell>),

    #[error("no data rows in {}", .0.display())]
    EmptyAfterFiltering(PathBuf),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] misig_core::Error),
}

fn rejected_rows(cells: &[BadCell]) -> usize {
    let mut lines: Vec<u64> = cells.iter().map(|c| c.line).collect();
    lines.dedup();
    lines.len()
}

fn list(cells: &[BadCell]) -> String {
    cells.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e.to_string())
    }
}

impl CliError {
    /// 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 4,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::FileNotFound(_) => "file_not_found",
            CliError::ColumnNotFound(_) => "column_not_found",
            CliError::ParseError(_) => "parse_error",
            CliError::EmptyAfterFiltering(_) => "empty_after_filtering",
            CliError::Csv(_) => "csv",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "data",
        }
    }
}
