use std::fmt;
use std::path::Path;

/// Which part of a run went wrong; printed as the message prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Numeric,
    Io,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::Config => "CONFIG",
            Category::Numeric => "NUMERIC",
            Category::Io => "IO",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Category::Config => 2,
            Category::Numeric => 3,
            Category::Io => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub category: Category,
    /// "parse error", "validation error", or empty.
    kind: &'static str,
    message: String,
}

impl CliError {
    pub fn parse(e: &serde_json::Error) -> Self {
        CliError { category: Category::Config, kind: "parse error", message: e.to_string() }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError { category: Category::Config, kind: "validation error", message: msg.into() }
    }

    pub fn io(path: &Path, e: &std::io::Error) -> Self {
        CliError { category: Category::Io, kind: "", message: format!("{}: {e}", path.display()) }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError { category: Category::Numeric, kind: "", message: msg.into() }
    }

    /// Prefix the message with where it happened.
    pub fn context(mut self, ctx: impl fmt::Display) -> Self {
        self.message = format!("{ctx}: {}", self.message);
        self
    }
}

/// Bad inputs caught only at run time still count as configuration errors.
impl From<qtran_core::Error> for CliError {
    fn from(e: qtran_core::Error) -> Self {
        if e.is_validation() {
            CliError::validation(e.to_string())
        } else {
            CliError::numeric(e.to_string())
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.is_empty() {
            write!(f, "{}: {}", self.category.label(), self.message)
        } else {
            write!(f, "{}: {}: {}", self.category.label(), self.kind, self.message)
        }
    }
}

impl std::error::Error for CliError {}
