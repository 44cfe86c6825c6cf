//! Source positions as reported in diagnostics and trace output.

use core::fmt;

/// A contiguous region of source text. `line` and `column` are 1-based,
/// `len` counts characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub len: u32,
}

impl Span {
    pub fn new(line: u32, column: u32, len: u32) -> Self {
        Span { line, column, len }
    }

    /// Span for a synthesized node that has no source position.
    pub fn synthetic() -> Self {
        Span { line: 1, column: 1, len: 1 }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
