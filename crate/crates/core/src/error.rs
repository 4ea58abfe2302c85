use std::fmt;

use crate::build::BuildReport;

/// A line/column position in a text source (1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// One located message from the Lopro front end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: error: {}", self.span, self.message)
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A machine, instruction, or configuration is internally inconsistent.
    #[error("structural error: {0}")]
    Structure(String),

    /// A caller-supplied argument is out of range or has the wrong shape.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The machine text format could not be parsed.
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    /// A resource limit was exceeded in fatal mode.
    #[error("build aborted: {kind} limit exceeded ({report})")]
    Limit {
        kind: crate::build::LimitKind,
        report: BuildReport,
    },

    /// Exhaustive evaluation would need too many inputs.
    #[error("truth table refused: {bits} input bits exceeds the cap of {cap}")]
    TooManyInputs { bits: usize, cap: usize },

    /// Lopro parse or elaboration errors.
    #[error("{}", join_diagnostics(.0))]
    Lopro(Vec<Diagnostic>),

    /// A Lopro construct is outside the lowerable subset.
    #[error("cannot lower rule for state `{state}` ({span}): {construct}")]
    Lowering {
        state: String,
        span: Span,
        construct: String,
    },

    #[error("malformed network file: {0}")]
    Network(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
