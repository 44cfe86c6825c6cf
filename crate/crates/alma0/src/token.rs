//! Tokens produced by the lexer.

use alloc::string::String;
use core::fmt;

use crate::span::Span;

/// Reserved words of the language. An identifier never lexes as one of these.
pub const KEYWORDS: &[(&str, TokenKind)] = &[
    ("MODULE", TokenKind::Module),
    ("BEGIN", TokenKind::Begin),
    ("END", TokenKind::End),
    ("CONST", TokenKind::Const),
    ("TYPE", TokenKind::Type),
    ("VAR", TokenKind::Var),
    ("PROCEDURE", TokenKind::Procedure),
    ("ARRAY", TokenKind::Array),
    ("OF", TokenKind::Of),
    ("INTEGER", TokenKind::Integer),
    ("BOOLEAN", TokenKind::Boolean),
    ("IF", TokenKind::If),
    ("THEN", TokenKind::Then),
    ("ELSE", TokenKind::Else),
    ("WHILE", TokenKind::While),
    ("DO", TokenKind::Do),
    ("FOR", TokenKind::For),
    ("TO", TokenKind::To),
    ("EITHER", TokenKind::Either),
    ("ORELSE", TokenKind::Orelse),
    ("SOME", TokenKind::Some),
    ("FORALL", TokenKind::Forall),
    ("COMMIT", TokenKind::Commit),
    ("NOT", TokenKind::Not),
    ("AND", TokenKind::And),
    ("OR", TokenKind::Or),
    ("DIV", TokenKind::Div),
    ("MOD", TokenKind::Mod),
    ("RETURN", TokenKind::Return),
    ("MIX", TokenKind::Mix),
    ("TRUE", TokenKind::True),
    ("FALSE", TokenKind::False),
    ("KNOWN", TokenKind::Known),
    ("WRITE", TokenKind::Write),
    ("WRITELN", TokenKind::Writeln),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    // keywords
    Module,
    Begin,
    End,
    Const,
    Type,
    Var,
    Procedure,
    Array,
    Of,
    Integer,
    Boolean,
    If,
    Then,
    Else,
    While,
    Do,
    For,
    To,
    Either,
    Orelse,
    Some,
    Forall,
    Commit,
    Not,
    And,
    Or,
    Div,
    Mod,
    Return,
    Mix,
    True,
    False,
    Known,
    Write,
    Writeln,
    // literals and names
    Ident,
    Int,
    Str,
    // operators and punctuation
    Assign,   // :=
    Eq,       // =
    NotEq,    // # or <>
    Less,     // <
    LessEq,   // <=
    Greater,  // >
    GreaterEq, // >=
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semicolon,
    Colon,
    DotDot,
    Dot,
    Eof,
}

impl TokenKind {
    /// Human-readable name used in "expected ..." diagnostics.
    pub fn describe(self) -> &'static str {
        for (name, kind) in KEYWORDS {
            if *kind == self {
                return name;
            }
        }
        match self {
            TokenKind::Ident => "identifier",
            TokenKind::Int => "integer literal",
            TokenKind::Str => "string literal",
            TokenKind::Assign => "':='",
            TokenKind::Eq => "'='",
            TokenKind::NotEq => "'<>'",
            TokenKind::Less => "'<'",
            TokenKind::LessEq => "'<='",
            TokenKind::Greater => "'>'",
            TokenKind::GreaterEq => "'>='",
            TokenKind::Plus => "'+'",
            TokenKind::Minus => "'-'",
            TokenKind::Star => "'*'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::LBracket => "'['",
            TokenKind::RBracket => "']'",
            TokenKind::Comma => "','",
            TokenKind::Semicolon => "';'",
            TokenKind::Colon => "':'",
            TokenKind::DotDot => "'..'",
            TokenKind::Dot => "'.'",
            TokenKind::Eof => "end of input",
            _ => "keyword",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == TokenKind::Eof {
            write!(f, "end of input")
        } else {
            write!(f, "'{}'", self.lexeme)
        }
    }
}

/// Look up a reserved word; returns `None` for ordinary identifiers.
pub fn keyword(text: &str) -> Option<TokenKind> {
    KEYWORDS
        .iter()
        .find(|(name, _)| *name == text)
        .map(|(_, kind)| *kind)
}
