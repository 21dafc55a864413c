//! A small declarative language for models, bundles and queries.
//!
//! ```text
//! model P(3);
//! line L gg c1 = H;
//! bundle E rank 2 gg_twist chern = [H, 3*H^2];
//! certify_top E L;
//! ```

pub mod ast;
mod exec;
mod lexer;
mod parser;
pub mod pretty;

use serde::Serialize;

pub use exec::{execute, run_source, ExecOptions, Report, ReportLine, Status, DEFAULT_UNIVERSAL_DEGREE};
pub use parser::parse;

/// Largest rank a bundle may be declared with.
pub const MAX_RANK: u32 = 12;
/// Largest top degree of a `P`, `PxP` or `G` model.
pub const MAX_MODEL_DEGREE: u32 = 64;
/// Largest degree of a universal model, explicit or implicit.
pub const MAX_UNIVERSAL_DEGREE: u32 = 16;
/// Largest literal exponent.
pub const MAX_EXPONENT: u32 = 256;

/// A 1-based position in the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: u32,
    pub column: u32,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, span: Span) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            line: span.line,
            column: span.column,
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at {}:{}: {}", self.line, self.column, self.message)
    }
}
