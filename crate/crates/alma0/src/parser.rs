//! Recursive descent parser.
//!
//! Grammar (EBNF):
//!
//! ```text
//! program   := "MODULE" id ";" {decl} "BEGIN" stmtseq "END" id "."
//! decl      := "CONST" {id "=" expr ";"}
//!            | "TYPE" {id "=" type ";"}
//!            | "VAR" {idlist ":" type ";"}
//!            | "PROCEDURE" id [params] [":" type] ";" {decl} "BEGIN" stmtseq "END" id ";"
//! params    := "(" [group {";" group}] ")" ; group := ["VAR"|"MIX"] idlist ":" type
//! type      := "INTEGER" | "BOOLEAN" | id | "(" idlist ")"
//!            | "[" expr ".." expr "]" | "ARRAY" range {"," range} "OF" type
//! stmtseq   := [stmt] {";" [stmt]}
//! stmt      := designator ":=" expr
//!            | "IF" expr "THEN" stmtseq ["ELSE" stmtseq] "END"
//!            | "WHILE" expr "DO" stmtseq "END"
//!            | "FOR" id ":=" expr "TO" expr "DO" stmtseq "END"
//!            | "SOME" id ":=" expr "TO" expr "DO" stmtseq "END"
//!            | "EITHER" stmtseq "ORELSE" stmtseq {"ORELSE" stmtseq} "END"
//!            | "FORALL" stmtseq "DO" stmtseq "END"
//!            | "COMMIT" stmtseq "END"
//!            | "NOT" stmt
//!            | "RETURN" [expr]
//!            | ("WRITE" | "WRITELN") ["(" expr {"," expr} ")"]
//!            | expr
//! expr      := simple [relop simple] ; relop := "=" | "#" | "<>" | "<" | "<=" | ">" | ">="
//! simple    := ["+"|"-"] term {("+"|"-"|"OR") term}
//! term      := factor {("*"|"DIV"|"MOD"|"AND") factor}
//! factor    := int | string | "TRUE" | "FALSE" | "(" expr ")" | "NOT" factor
//!            | "KNOWN" "(" designator ")" | id ["[" expr {"," expr} "]"] ["(" [expr {"," expr}] ")"]
//! ```
//!
//! An expression used at statement position whose top-level operator is `=`
//! is the generalized equality; a statement-position `NOT` is negation as
//! failure. Both disambiguations are positional.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ast::*;
use crate::span::Span;
use crate::token::{Token, TokenKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

/// Parse a token stream (as produced by [`crate::lexer::tokenize`]) into a module.
pub fn parse_program(tokens: &[Token]) -> Result<Module, ParseError> {
    let mut p = Parser { tokens, pos: 0, depth: 0 };
    let module = p.module()?;
    p.expect(TokenKind::Eof)?;
    Ok(module)
}

const MAX_NESTING: u32 = 256;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: u32,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> TokenKind {
        self.peek().kind
    }

    fn bump(&mut self) -> &Token {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek_kind() == kind
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&Token, ParseError> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(kind.describe()))
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError {
            span: self.peek().span,
            message: format!("expected {}, found {}", expected, self.peek()),
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        let tok = self.expect(TokenKind::Ident)?;
        Ok(Ident { text: tok.lexeme.clone(), span: tok.span })
    }

    // -- module and declarations --

    fn module(&mut self) -> Result<Module, ParseError> {
        self.expect(TokenKind::Module)?;
        let name = self.ident()?;
        self.expect(TokenKind::Semicolon)?;
        let decls = self.decls()?;
        self.expect(TokenKind::Begin)?;
        let body = self.stmtseq()?;
        self.expect(TokenKind::End)?;
        let end_name = self.ident()?;
        if end_name.text != name.text {
            return Err(ParseError {
                span: end_name.span,
                message: format!(
                    "module trailer names '{}' but the module is '{}'",
                    end_name.text, name.text
                ),
            });
        }
        self.expect(TokenKind::Dot)?;
        Ok(Module { name, decls, body })
    }

    fn decls(&mut self) -> Result<Vec<Decl>, ParseError> {
        let mut decls = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::Const => {
                    self.bump();
                    let mut items = Vec::new();
                    while self.at(TokenKind::Ident) {
                        let name = self.ident()?;
                        self.expect(TokenKind::Eq)?;
                        let value = self.expr()?;
                        self.expect(TokenKind::Semicolon)?;
                        items.push((name, value));
                    }
                    decls.push(Decl::Const(items));
                }
                TokenKind::Type => {
                    self.bump();
                    let mut items = Vec::new();
                    while self.at(TokenKind::Ident) {
                        let name = self.ident()?;
                        self.expect(TokenKind::Eq)?;
                        let ty = self.type_expr()?;
                        self.expect(TokenKind::Semicolon)?;
                        items.push((name, ty));
                    }
                    decls.push(Decl::Type(items));
                }
                TokenKind::Var => {
                    self.bump();
                    let mut groups = Vec::new();
                    while self.at(TokenKind::Ident) {
                        let names = self.ident_list()?;
                        self.expect(TokenKind::Colon)?;
                        let ty = self.type_expr()?;
                        self.expect(TokenKind::Semicolon)?;
                        groups.push((names, ty));
                    }
                    decls.push(Decl::Var(groups));
                }
                TokenKind::Procedure => {
                    decls.push(Decl::Proc(self.proc_decl()?));
                }
                _ => return Ok(decls),
            }
        }
    }

    fn proc_decl(&mut self) -> Result<ProcDecl, ParseError> {
        self.expect(TokenKind::Procedure)?;
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat(TokenKind::LParen) {
            if !self.at(TokenKind::RParen) {
                loop {
                    let mode = if self.eat(TokenKind::Var) {
                        Mode::Var
                    } else if self.eat(TokenKind::Mix) {
                        Mode::Mix
                    } else {
                        Mode::Value
                    };
                    let names = self.ident_list()?;
                    self.expect(TokenKind::Colon)?;
                    let ty = self.type_expr()?;
                    params.push(ParamGroup { mode, names, ty });
                    if !self.eat(TokenKind::Semicolon) {
                        break;
                    }
                }
            }
            self.expect(TokenKind::RParen)?;
        }
        let result = if self.eat(TokenKind::Colon) {
            Some(self.type_expr()?)
        } else {
            None
        };
        self.expect(TokenKind::Semicolon)?;
        let decls = self.decls()?;
        for d in &decls {
            if let Decl::Proc(inner) = d {
                return Err(ParseError {
                    span: inner.name.span,
                    message: "nested procedure declarations are not supported".to_string(),
                });
            }
        }
        self.expect(TokenKind::Begin)?;
        let body = self.stmtseq()?;
        self.expect(TokenKind::End)?;
        let end_name = self.ident()?;
        if end_name.text != name.text {
            return Err(ParseError {
                span: end_name.span,
                message: format!(
                    "procedure trailer names '{}' but the procedure is '{}'",
                    end_name.text, name.text
                ),
            });
        }
        self.expect(TokenKind::Semicolon)?;
        Ok(ProcDecl { name, params, result, decls, body })
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        let mut names = Vec::new();
        names.push(self.ident()?);
        while self.eat(TokenKind::Comma) {
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn type_expr(&mut self) -> Result<TypeExpr, ParseError> {
        match self.peek_kind() {
            TokenKind::Integer => {
                self.bump();
                Ok(TypeExpr::Integer)
            }
            TokenKind::Boolean => {
                self.bump();
                Ok(TypeExpr::Boolean)
            }
            TokenKind::Ident => Ok(TypeExpr::Named(self.ident()?)),
            TokenKind::LParen => {
                self.bump();
                let names = self.ident_list()?;
                self.expect(TokenKind::RParen)?;
                Ok(TypeExpr::Enum(names))
            }
            TokenKind::LBracket => {
                let (lo, hi) = self.range()?;
                Ok(TypeExpr::Subrange(Box::new(lo), Box::new(hi)))
            }
            TokenKind::Array => {
                self.bump();
                let mut ranges = Vec::new();
                ranges.push(self.range()?);
                while self.eat(TokenKind::Comma) {
                    ranges.push(self.range()?);
                }
                self.expect(TokenKind::Of)?;
                let elem = self.type_expr()?;
                Ok(TypeExpr::Array { ranges, elem: Box::new(elem) })
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    fn range(&mut self) -> Result<(Expr, Expr), ParseError> {
        self.expect(TokenKind::LBracket)?;
        let lo = self.expr()?;
        self.expect(TokenKind::DotDot)?;
        let hi = self.expr()?;
        self.expect(TokenKind::RBracket)?;
        Ok((lo, hi))
    }

    // -- statements --

    fn starts_stmt(&self) -> bool {
        matches!(
            self.peek_kind(),
            TokenKind::Ident
                | TokenKind::If
                | TokenKind::While
                | TokenKind::For
                | TokenKind::Some
                | TokenKind::Either
                | TokenKind::Forall
                | TokenKind::Commit
                | TokenKind::Not
                | TokenKind::Return
                | TokenKind::Write
                | TokenKind::Writeln
                | TokenKind::Int
                | TokenKind::True
                | TokenKind::False
                | TokenKind::LParen
                | TokenKind::Known
                | TokenKind::Minus
                | TokenKind::Plus
                | TokenKind::Str
        )
    }

    fn stmtseq(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = Vec::new();
        loop {
            if self.starts_stmt() {
                stmts.push(self.stmt()?);
            }
            // empty statements between separators are allowed, so a trailing
            // ';' before END/ELSE/ORELSE/DO parses
            if !self.eat(TokenKind::Semicolon) {
                return Ok(stmts);
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        self.enter()?;
        let result = self.stmt_inner();
        self.depth -= 1;
        result
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError {
                span: self.peek().span,
                message: format!("nesting deeper than {} levels", MAX_NESTING),
            });
        }
        Ok(())
    }

    fn stmt_inner(&mut self) -> Result<Stmt, ParseError> {
        let span = self.peek().span;
        let kind = match self.peek_kind() {
            TokenKind::If => {
                self.bump();
                let cond = self.expr()?;
                self.expect(TokenKind::Then)?;
                let then_branch = self.stmtseq()?;
                let else_branch = if self.eat(TokenKind::Else) {
                    self.stmtseq()?
                } else {
                    Vec::new()
                };
                self.expect(TokenKind::End)?;
                StmtKind::If { cond, then_branch, else_branch }
            }
            TokenKind::While => {
                self.bump();
                let cond = self.expr()?;
                self.expect(TokenKind::Do)?;
                let body = self.stmtseq()?;
                self.expect(TokenKind::End)?;
                StmtKind::While { cond, body }
            }
            TokenKind::For | TokenKind::Some => {
                let some = self.peek_kind() == TokenKind::Some;
                self.bump();
                let var = self.ident()?;
                self.expect(TokenKind::Assign)?;
                let lo = self.expr()?;
                self.expect(TokenKind::To)?;
                let hi = self.expr()?;
                self.expect(TokenKind::Do)?;
                let body = self.stmtseq()?;
                self.expect(TokenKind::End)?;
                if some {
                    StmtKind::Some { var, lo, hi, body }
                } else {
                    StmtKind::For { var, lo, hi, body }
                }
            }
            TokenKind::Either => {
                self.bump();
                let mut branches = Vec::new();
                branches.push(self.stmtseq()?);
                if !self.at(TokenKind::Orelse) {
                    return Err(self.unexpected("ORELSE (EITHER needs at least two branches)"));
                }
                while self.eat(TokenKind::Orelse) {
                    branches.push(self.stmtseq()?);
                }
                self.expect(TokenKind::End)?;
                StmtKind::Either { branches }
            }
            TokenKind::Forall => {
                self.bump();
                let generator = self.stmtseq()?;
                self.expect(TokenKind::Do)?;
                let body = self.stmtseq()?;
                self.expect(TokenKind::End)?;
                StmtKind::Forall { generator, body }
            }
            TokenKind::Commit => {
                self.bump();
                let body = self.stmtseq()?;
                self.expect(TokenKind::End)?;
                StmtKind::Commit { body }
            }
            TokenKind::Not => {
                self.bump();
                let inner = self.stmt()?;
                StmtKind::Not(Box::new(inner))
            }
            TokenKind::Return => {
                self.bump();
                let value = if self.starts_stmt() && !self.at(TokenKind::Str) {
                    Some(self.expr()?)
                } else {
                    None
                };
                StmtKind::Return(value)
            }
            TokenKind::Write | TokenKind::Writeln => {
                let newline = self.peek_kind() == TokenKind::Writeln;
                self.bump();
                let mut items = Vec::new();
                if self.eat(TokenKind::LParen) {
                    if !self.at(TokenKind::RParen) {
                        items.push(self.expr()?);
                        while self.eat(TokenKind::Comma) {
                            items.push(self.expr()?);
                        }
                    }
                    self.expect(TokenKind::RParen)?;
                }
                StmtKind::Write { items, newline }
            }
            _ => {
                let e = self.expr()?;
                if self.at(TokenKind::Assign) {
                    if !matches!(e.kind, ExprKind::Designator { .. }) {
                        return Err(ParseError {
                            span: self.peek().span,
                            message: "assignment target must be a variable designator".to_string(),
                        });
                    }
                    self.bump();
                    let value = self.expr()?;
                    StmtKind::Assign { target: e, value }
                } else {
                    StmtKind::Expr(e)
                }
            }
        };
        Ok(Stmt { kind, span })
    }

    // -- expressions --

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.simple_expr()?;
        let op = match self.peek_kind() {
            TokenKind::Eq => BinOp::Eq,
            TokenKind::NotEq => BinOp::NotEq,
            TokenKind::Less => BinOp::Less,
            TokenKind::LessEq => BinOp::LessEq,
            TokenKind::Greater => BinOp::Greater,
            TokenKind::GreaterEq => BinOp::GreaterEq,
            _ => return Ok(lhs),
        };
        let span = self.bump().span;
        let rhs = self.simple_expr()?;
        Ok(Expr {
            kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            span,
        })
    }

    fn simple_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.at(TokenKind::Minus) {
            let span = self.bump().span;
            let operand = self.term()?;
            Expr { kind: ExprKind::Unary { op: UnOp::Neg, operand: Box::new(operand) }, span }
        } else {
            self.eat(TokenKind::Plus);
            self.term()?
        };
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                TokenKind::Or => BinOp::Or,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.term()?;
            lhs = Expr {
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Div => BinOp::Div,
                TokenKind::Mod => BinOp::Mod,
                TokenKind::And => BinOp::And,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.factor()?;
            lhs = Expr {
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span,
            };
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let result = self.factor_inner();
        self.depth -= 1;
        result
    }

    fn factor_inner(&mut self) -> Result<Expr, ParseError> {
        let span = self.peek().span;
        match self.peek_kind() {
            TokenKind::Int => {
                let tok = self.bump();
                let value: i64 = tok.lexeme.parse().map_err(|_| ParseError {
                    span,
                    message: format!("integer literal '{}' is out of range", tok.lexeme),
                })?;
                Ok(Expr { kind: ExprKind::Int(value), span })
            }
            TokenKind::True => {
                self.bump();
                Ok(Expr { kind: ExprKind::Bool(true), span })
            }
            TokenKind::False => {
                self.bump();
                Ok(Expr { kind: ExprKind::Bool(false), span })
            }
            TokenKind::Str => {
                let tok = self.bump();
                Ok(Expr { kind: ExprKind::Str(tok.lexeme.clone()), span })
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Not => {
                self.bump();
                let operand = self.factor()?;
                Ok(Expr { kind: ExprKind::Unary { op: UnOp::Not, operand: Box::new(operand) }, span })
            }
            TokenKind::Minus => {
                self.bump();
                let operand = self.factor()?;
                Ok(Expr { kind: ExprKind::Unary { op: UnOp::Neg, operand: Box::new(operand) }, span })
            }
            TokenKind::Known => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(Expr { kind: ExprKind::Known(Box::new(inner)), span })
            }
            TokenKind::Ident => {
                let base = self.ident()?;
                if self.at(TokenKind::LParen) {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.at(TokenKind::RParen) {
                        args.push(self.expr()?);
                        while self.eat(TokenKind::Comma) {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(TokenKind::RParen)?;
                    return Ok(Expr { kind: ExprKind::Call { callee: base, args }, span });
                }
                let mut indices = Vec::new();
                if self.eat(TokenKind::LBracket) {
                    indices.push(self.expr()?);
                    while self.eat(TokenKind::Comma) {
                        indices.push(self.expr()?);
                    }
                    self.expect(TokenKind::RBracket)?;
                }
                Ok(Expr { kind: ExprKind::Designator { base, indices }, span })
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn parse(src: &str) -> Module {
        parse_program(&tokenize(src).unwrap()).unwrap()
    }

    #[test]
    fn minimal_module() {
        let m = parse("MODULE m; BEGIN END m.");
        assert!(m.decls.is_empty());
        assert!(m.body.is_empty());
    }

    #[test]
    fn some_with_expression_bound() {
        let m = parse(
            "MODULE m; VAR a: ARRAY [0..9] OF INTEGER; i, j, sum: INTEGER;\
             BEGIN SOME j := 0 TO 10-sum DO a[i] = j; sum := sum + j END END m.",
        );
        match &m.body[0].kind {
            StmtKind::Some { var, body, .. } => {
                assert_eq!(var.text, "j");
                assert_eq!(body.len(), 2);
            }
            other => panic!("expected SOME, got {:?}", other),
        }
    }

    #[test]
    fn trailing_semicolon_before_end() {
        let m = parse("MODULE m; VAR x: INTEGER; BEGIN x := 1; END m.");
        assert_eq!(m.body.len(), 1);
    }

    #[test]
    fn module_trailer_must_match() {
        let toks = tokenize("MODULE m; BEGIN END q.").unwrap();
        let err = parse_program(&toks).unwrap_err();
        assert!(err.message.contains("trailer"));
    }

    #[test]
    fn either_requires_a_second_branch() {
        let toks = tokenize("MODULE m; BEGIN EITHER TRUE END END m.").unwrap();
        assert!(parse_program(&toks).is_err());
    }

    #[test]
    fn statement_not_binds_the_following_statement() {
        let m = parse("MODULE m; VAR x: INTEGER; BEGIN NOT x = 1 END m.");
        match &m.body[0].kind {
            StmtKind::Not(inner) => assert!(matches!(inner.kind, StmtKind::Expr(_))),
            other => panic!("expected NOT, got {:?}", other),
        }
    }

    #[test]
    fn bare_writeln() {
        let m = parse("MODULE m; BEGIN WRITELN END m.");
        match &m.body[0].kind {
            StmtKind::Write { items, newline } => {
                assert!(items.is_empty());
                assert!(*newline);
            }
            other => panic!("expected WRITELN, got {:?}", other),
        }
    }

    #[test]
    fn negative_literal_in_equality() {
        let m = parse("MODULE m; VAR i: INTEGER; BEGIN i = -1 END m.");
        match &m.body[0].kind {
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Binary { op: BinOp::Eq, rhs, .. } => {
                    assert!(matches!(rhs.kind, ExprKind::Unary { op: UnOp::Neg, .. }));
                }
                other => panic!("expected '=', got {:?}", other),
            },
            other => panic!("expected expression statement, got {:?}", other),
        }
    }

    #[test]
    fn and_binds_tighter_than_or_and_parens_work() {
        let m = parse("MODULE m; VAR a, b, c: BOOLEAN; BEGIN (a OR b) AND c END m.");
        match &m.body[0].kind {
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Binary { op: BinOp::And, lhs, .. } => {
                    assert!(matches!(lhs.kind, ExprKind::Binary { op: BinOp::Or, .. }));
                }
                other => panic!("unexpected shape {:?}", other),
            },
            _ => unreachable!(),
        }
    }

    #[test]
    fn pathological_nesting_is_rejected_not_crashed() {
        let mut src = String::from("MODULE m; VAR x: INTEGER; BEGIN x := ");
        for _ in 0..5_000 {
            src.push('(');
        }
        src.push('1');
        for _ in 0..5_000 {
            src.push(')');
        }
        src.push_str(" END m.");
        let err = parse_program(&tokenize(&src).unwrap()).unwrap_err();
        assert!(err.message.contains("nesting"));
    }

    #[test]
    fn multi_index_designator() {
        let m = parse("MODULE m; VAR x: ARRAY [1..2],[1..2] OF INTEGER; i, j, k: INTEGER; BEGIN x[i,j] = k END m.");
        match &m.body[0].kind {
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Binary { op: BinOp::Eq, lhs, .. } => match &lhs.kind {
                    ExprKind::Designator { indices, .. } => assert_eq!(indices.len(), 2),
                    other => panic!("expected designator, got {:?}", other),
                },
                other => panic!("expected '=', got {:?}", other),
            },
            _ => unreachable!(),
        }
    }
}
