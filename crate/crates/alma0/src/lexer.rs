//! Hand-written scanner. Comments `(* ... *)` nest and are skipped.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::span::Span;
use crate::token::{keyword, Token, TokenKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LexError {}

struct Lexer<'s> {
    chars: Vec<char>,
    src: core::marker::PhantomData<&'s str>,
    pos: usize,
    line: u32,
    column: u32,
}

/// Scan `source` into a token sequence terminated by an `Eof` token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        src: core::marker::PhantomData,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        let tok = lx.next_token()?;
        let done = tok.kind == TokenKind::Eof;
        tokens.push(tok);
        if done {
            break;
        }
    }
    Ok(tokens)
}

impl<'s> Lexer<'s> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self, len: u32) -> Span {
        Span::new(self.line, self.column, len)
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('(') if self.peek2() == Some('*') => {
                    let start = self.here(2);
                    self.bump();
                    self.bump();
                    let mut depth = 1usize;
                    loop {
                        match self.peek() {
                            None => {
                                return Err(LexError {
                                    span: start,
                                    message: "unterminated comment".to_string(),
                                })
                            }
                            Some('(') if self.peek2() == Some('*') => {
                                self.bump();
                                self.bump();
                                depth += 1;
                            }
                            Some('*') if self.peek2() == Some(')') => {
                                self.bump();
                                self.bump();
                                depth -= 1;
                                if depth == 0 {
                                    break;
                                }
                            }
                            Some(_) => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, LexError> {
        self.skip_trivia()?;
        let span_start = self.here(1);
        let c = match self.peek() {
            None => {
                return Ok(Token {
                    kind: TokenKind::Eof,
                    lexeme: String::new(),
                    span: span_start,
                })
            }
            Some(c) => c,
        };

        if c.is_ascii_alphabetic() {
            let mut text = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            let kind = keyword(&text).unwrap_or(TokenKind::Ident);
            let span = Span::new(span_start.line, span_start.column, text.chars().count() as u32);
            return Ok(Token { kind, lexeme: text, span });
        }

        if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            let span = Span::new(span_start.line, span_start.column, text.len() as u32);
            return Ok(Token { kind: TokenKind::Int, lexeme: text, span });
        }

        if c == '\'' {
            self.bump();
            let mut text = String::new();
            loop {
                match self.peek() {
                    None | Some('\n') => {
                        return Err(LexError {
                            span: span_start,
                            message: "unterminated string literal".to_string(),
                        })
                    }
                    Some('\'') => {
                        self.bump();
                        break;
                    }
                    Some(c) => {
                        text.push(c);
                        self.bump();
                    }
                }
            }
            let span = Span::new(
                span_start.line,
                span_start.column,
                text.chars().count() as u32 + 2,
            );
            return Ok(Token { kind: TokenKind::Str, lexeme: text, span });
        }

        let (kind, text, len) = match c {
            ':' if self.peek2() == Some('=') => (TokenKind::Assign, ":=", 2u32),
            ':' => (TokenKind::Colon, ":", 1),
            '<' if self.peek2() == Some('=') => (TokenKind::LessEq, "<=", 2),
            '<' if self.peek2() == Some('>') => (TokenKind::NotEq, "<>", 2),
            '<' => (TokenKind::Less, "<", 1),
            '>' if self.peek2() == Some('=') => (TokenKind::GreaterEq, ">=", 2),
            '>' => (TokenKind::Greater, ">", 1),
            '=' => (TokenKind::Eq, "=", 1),
            '#' => (TokenKind::NotEq, "#", 1),
            '+' => (TokenKind::Plus, "+", 1),
            '-' => (TokenKind::Minus, "-", 1),
            '*' => (TokenKind::Star, "*", 1),
            '(' => (TokenKind::LParen, "(", 1),
            ')' => (TokenKind::RParen, ")", 1),
            '[' => (TokenKind::LBracket, "[", 1),
            ']' => (TokenKind::RBracket, "]", 1),
            ',' => (TokenKind::Comma, ",", 1),
            ';' => (TokenKind::Semicolon, ";", 1),
            '.' if self.peek2() == Some('.') => (TokenKind::DotDot, "..", 2),
            '.' => (TokenKind::Dot, ".", 1),
            other => {
                return Err(LexError {
                    span: span_start,
                    message: format!("unexpected character '{}'", other),
                })
            }
        };
        for _ in 0..len {
            self.bump();
        }
        Ok(Token {
            kind,
            lexeme: text.to_string(),
            span: Span::new(span_start.line, span_start.column, len),
        })
    }
}
