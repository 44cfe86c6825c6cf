//! Core interpreter for Alma-0, an imperative Modula-2 subset extended with
//! "don't know" nondeterminism: choice points created by `EITHER`/`ORELSE`
//! and `SOME`, backtracking with full state restoration, `FORALL` iteration
//! over all solutions, `COMMIT`, negation as failure, initialized-variable
//! tracking with `KNOWN` and generalized equality, and call by mixed form.
//!
//! The crate is `no_std`-compatible (with `alloc`); program output goes to a
//! caller-supplied [`core::fmt::Write`] sink. The usual pipeline is
//! [`tokenize`] → [`parse_program`] → [`resolve()`] → [`engine::run`], or
//! [`compile`] and [`run_source`] for the whole thing.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod ast;
pub mod builtins;
pub mod engine;
pub mod lexer;
pub mod parser;
pub mod program;
pub mod resolve;
pub mod span;
pub mod store;
pub mod token;

use alloc::string::String;
use core::fmt;

pub use engine::{Limits, RunResult, RuntimeError};
pub use lexer::{tokenize, LexError};
pub use parser::{parse_program, ParseError};
pub use resolve::{resolve, ResolveError};
pub use span::Span;

/// Any front-end failure: lexing, parsing, or resolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompileError {
    Lex(LexError),
    Parse(ParseError),
    Resolve(ResolveError),
}

impl CompileError {
    pub fn span(&self) -> Span {
        match self {
            CompileError::Lex(e) => e.span,
            CompileError::Parse(e) => e.span,
            CompileError::Resolve(e) => e.span,
        }
    }
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompileError::Lex(e) => write!(f, "{}", e),
            CompileError::Parse(e) => write!(f, "{}", e),
            CompileError::Resolve(e) => write!(f, "{}", e),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CompileError {}

/// Lex, parse, and resolve a source module.
pub fn compile(source: &str) -> Result<program::Program, CompileError> {
    let tokens = tokenize(source).map_err(CompileError::Lex)?;
    let module = parse_program(&tokens).map_err(CompileError::Parse)?;
    resolve(&module).map_err(CompileError::Resolve)
}

/// Parse a source module without resolving it (for `dump-ast`).
pub fn parse_source(source: &str) -> Result<ast::Module, CompileError> {
    let tokens = tokenize(source).map_err(CompileError::Lex)?;
    parse_program(&tokens).map_err(CompileError::Parse)
}

/// Compile and run, capturing output. Convenient for tests.
pub fn run_source(source: &str, limits: Limits) -> Result<(RunResult, String), CompileError> {
    let prog = compile(source)?;
    let mut out = String::new();
    let result = engine::run(&prog, limits, &mut out);
    Ok((result, out))
}
