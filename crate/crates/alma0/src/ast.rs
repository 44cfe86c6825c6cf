//! Parse tree for a source module, plus the stable line-oriented dump used
//! by `dump-ast` and a pretty-printer that emits parseable source again.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::span::Span;

#[derive(Clone, Debug)]
pub struct Ident {
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Module {
    pub name: Ident,
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug)]
pub enum Decl {
    Const(Vec<(Ident, Expr)>),
    Type(Vec<(Ident, TypeExpr)>),
    Var(Vec<(Vec<Ident>, TypeExpr)>),
    Proc(ProcDecl),
}

#[derive(Clone, Debug)]
pub struct ProcDecl {
    pub name: Ident,
    pub params: Vec<ParamGroup>,
    pub result: Option<TypeExpr>,
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Value,
    Var,
    Mix,
}

#[derive(Clone, Debug)]
pub struct ParamGroup {
    pub mode: Mode,
    pub names: Vec<Ident>,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug)]
pub enum TypeExpr {
    Integer,
    Boolean,
    Named(Ident),
    Enum(Vec<Ident>),
    Subrange(Box<Expr>, Box<Expr>),
    Array {
        ranges: Vec<(Expr, Expr)>,
        elem: Box<TypeExpr>,
    },
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum StmtKind {
    Assign { target: Expr, value: Expr },
    /// A bare expression: a test, a generalized equality, or a call.
    Expr(Expr),
    If { cond: Expr, then_branch: Vec<Stmt>, else_branch: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    For { var: Ident, lo: Expr, hi: Expr, body: Vec<Stmt> },
    Some { var: Ident, lo: Expr, hi: Expr, body: Vec<Stmt> },
    Either { branches: Vec<Vec<Stmt>> },
    Forall { generator: Vec<Stmt>, body: Vec<Stmt> },
    Commit { body: Vec<Stmt> },
    Not(Box<Stmt>),
    Return(Option<Expr>),
    Write { items: Vec<Expr>, newline: bool },
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    NotEq,
    Less,
    LessEq,
    Greater,
    GreaterEq,
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Str(String),
    /// A variable reference, possibly indexed: `x`, `a[i]`, `m[i,j]`.
    Designator { base: Ident, indices: Vec<Expr> },
    Call { callee: Ident, args: Vec<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Known(Box<Expr>),
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "DIV",
            BinOp::Mod => "MOD",
            BinOp::Eq => "=",
            BinOp::NotEq => "<>",
            BinOp::Less => "<",
            BinOp::LessEq => "<=",
            BinOp::Greater => ">",
            BinOp::GreaterEq => ">=",
            BinOp::And => "AND",
            BinOp::Or => "OR",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Eq
            | BinOp::NotEq
            | BinOp::Less
            | BinOp::LessEq
            | BinOp::Greater
            | BinOp::GreaterEq => 1,
            BinOp::Add | BinOp::Sub | BinOp::Or => 2,
            BinOp::Mul | BinOp::Div | BinOp::Mod | BinOp::And => 3,
        }
    }
}

// ---------------------------------------------------------------------------
// dump: one node per line, stable across runs
// ---------------------------------------------------------------------------

impl Module {
    /// Render the tree with one node per line, indented by nesting depth.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "MODULE {}", self.name.text);
        for d in &self.decls {
            dump_decl(d, 1, &mut out);
        }
        push_line(&mut out, 1, "BODY");
        for s in &self.body {
            dump_stmt(s, 2, &mut out);
        }
        out
    }
}

fn push_line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn dump_decl(d: &Decl, depth: usize, out: &mut String) {
    match d {
        Decl::Const(items) => {
            for (name, value) in items {
                push_line(out, depth, &alloc::format!("CONST {} = {}", name.text, pretty_expr(value)));
            }
        }
        Decl::Type(items) => {
            for (name, ty) in items {
                push_line(out, depth, &alloc::format!("TYPE {} = {}", name.text, pretty_type(ty)));
            }
        }
        Decl::Var(groups) => {
            for (names, ty) in groups {
                let list: Vec<&str> = names.iter().map(|n| n.text.as_str()).collect();
                push_line(out, depth, &alloc::format!("VAR {}: {}", list.join(", "), pretty_type(ty)));
            }
        }
        Decl::Proc(p) => {
            let mut head = alloc::format!("PROCEDURE {}", p.name.text);
            if p.result.is_some() {
                head.push_str(" (function)");
            }
            push_line(out, depth, &head);
            for g in &p.params {
                let mode = match g.mode {
                    Mode::Value => "value",
                    Mode::Var => "VAR",
                    Mode::Mix => "MIX",
                };
                let list: Vec<&str> = g.names.iter().map(|n| n.text.as_str()).collect();
                push_line(
                    out,
                    depth + 1,
                    &alloc::format!("PARAM {} {}: {}", mode, list.join(", "), pretty_type(&g.ty)),
                );
            }
            for d in &p.decls {
                dump_decl(d, depth + 1, out);
            }
            push_line(out, depth + 1, "BODY");
            for s in &p.body {
                dump_stmt(s, depth + 2, out);
            }
        }
    }
}

fn dump_stmt(s: &Stmt, depth: usize, out: &mut String) {
    match &s.kind {
        StmtKind::Assign { target, value } => {
            push_line(out, depth, &alloc::format!("ASSIGN {} := {}", pretty_expr(target), pretty_expr(value)));
        }
        StmtKind::Expr(e) => {
            push_line(out, depth, &alloc::format!("EXPR {}", pretty_expr(e)));
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            push_line(out, depth, &alloc::format!("IF {}", pretty_expr(cond)));
            push_line(out, depth + 1, "THEN");
            for s in then_branch {
                dump_stmt(s, depth + 2, out);
            }
            if !else_branch.is_empty() {
                push_line(out, depth + 1, "ELSE");
                for s in else_branch {
                    dump_stmt(s, depth + 2, out);
                }
            }
        }
        StmtKind::While { cond, body } => {
            push_line(out, depth, &alloc::format!("WHILE {}", pretty_expr(cond)));
            for s in body {
                dump_stmt(s, depth + 1, out);
            }
        }
        StmtKind::For { var, lo, hi, body } => {
            push_line(
                out,
                depth,
                &alloc::format!("FOR {} := {} TO {}", var.text, pretty_expr(lo), pretty_expr(hi)),
            );
            for s in body {
                dump_stmt(s, depth + 1, out);
            }
        }
        StmtKind::Some { var, lo, hi, body } => {
            push_line(
                out,
                depth,
                &alloc::format!("SOME {} := {} TO {}", var.text, pretty_expr(lo), pretty_expr(hi)),
            );
            for s in body {
                dump_stmt(s, depth + 1, out);
            }
        }
        StmtKind::Either { branches } => {
            push_line(out, depth, "EITHER");
            for b in branches {
                push_line(out, depth + 1, "BRANCH");
                for s in b {
                    dump_stmt(s, depth + 2, out);
                }
            }
        }
        StmtKind::Forall { generator, body } => {
            push_line(out, depth, "FORALL");
            push_line(out, depth + 1, "GENERATOR");
            for s in generator {
                dump_stmt(s, depth + 2, out);
            }
            push_line(out, depth + 1, "DO");
            for s in body {
                dump_stmt(s, depth + 2, out);
            }
        }
        StmtKind::Commit { body } => {
            push_line(out, depth, "COMMIT");
            for s in body {
                dump_stmt(s, depth + 1, out);
            }
        }
        StmtKind::Not(inner) => {
            push_line(out, depth, "NOT");
            dump_stmt(inner, depth + 1, out);
        }
        StmtKind::Return(value) => match value {
            None => push_line(out, depth, "RETURN"),
            Some(e) => push_line(out, depth, &alloc::format!("RETURN {}", pretty_expr(e))),
        },
        StmtKind::Write { items, newline } => {
            let name = if *newline { "WRITELN" } else { "WRITE" };
            let args: Vec<String> = items.iter().map(pretty_expr).collect();
            push_line(out, depth, &alloc::format!("{} {}", name, args.join(" ")));
        }
    }
}

// ---------------------------------------------------------------------------
// pretty printing (emits parseable source)
// ---------------------------------------------------------------------------

impl Module {
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "MODULE {};", self.name.text);
        for d in &self.decls {
            pretty_decl(d, 0, &mut out);
        }
        out.push_str("BEGIN\n");
        pretty_seq(&self.body, 1, &mut out);
        let _ = writeln!(out, "END {}.", self.name.text);
        out
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn pretty_decl(d: &Decl, depth: usize, out: &mut String) {
    match d {
        Decl::Const(items) => {
            indent(out, depth);
            out.push_str("CONST\n");
            for (name, value) in items {
                indent(out, depth + 1);
                let _ = writeln!(out, "{} = {};", name.text, pretty_expr(value));
            }
        }
        Decl::Type(items) => {
            indent(out, depth);
            out.push_str("TYPE\n");
            for (name, ty) in items {
                indent(out, depth + 1);
                let _ = writeln!(out, "{} = {};", name.text, pretty_type(ty));
            }
        }
        Decl::Var(groups) => {
            indent(out, depth);
            out.push_str("VAR\n");
            for (names, ty) in groups {
                indent(out, depth + 1);
                let list: Vec<&str> = names.iter().map(|n| n.text.as_str()).collect();
                let _ = writeln!(out, "{}: {};", list.join(", "), pretty_type(ty));
            }
        }
        Decl::Proc(p) => {
            indent(out, depth);
            let _ = write!(out, "PROCEDURE {}", p.name.text);
            if !p.params.is_empty() {
                out.push('(');
                for (i, g) in p.params.iter().enumerate() {
                    if i > 0 {
                        out.push_str("; ");
                    }
                    match g.mode {
                        Mode::Value => {}
                        Mode::Var => out.push_str("VAR "),
                        Mode::Mix => out.push_str("MIX "),
                    }
                    let list: Vec<&str> = g.names.iter().map(|n| n.text.as_str()).collect();
                    let _ = write!(out, "{}: {}", list.join(", "), pretty_type(&g.ty));
                }
                out.push(')');
            }
            if let Some(ty) = &p.result {
                let _ = write!(out, ": {}", pretty_type(ty));
            }
            out.push_str(";\n");
            for d in &p.decls {
                pretty_decl(d, depth, out);
            }
            indent(out, depth);
            out.push_str("BEGIN\n");
            pretty_seq(&p.body, depth + 1, out);
            indent(out, depth);
            let _ = writeln!(out, "END {};", p.name.text);
        }
    }
}

fn pretty_seq(stmts: &[Stmt], depth: usize, out: &mut String) {
    for (i, s) in stmts.iter().enumerate() {
        pretty_stmt(s, depth, out);
        if i + 1 < stmts.len() {
            out.truncate(out.trim_end_matches('\n').len());
            out.push_str(";\n");
        }
    }
}

fn pretty_stmt(s: &Stmt, depth: usize, out: &mut String) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{} := {}", pretty_expr(target), pretty_expr(value));
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{}", pretty_expr(e));
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            let _ = writeln!(out, "IF {} THEN", pretty_expr(cond));
            pretty_seq(then_branch, depth + 1, out);
            if !else_branch.is_empty() {
                indent(out, depth);
                out.push_str("ELSE\n");
                pretty_seq(else_branch, depth + 1, out);
            }
            indent(out, depth);
            out.push_str("END\n");
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "WHILE {} DO", pretty_expr(cond));
            pretty_seq(body, depth + 1, out);
            indent(out, depth);
            out.push_str("END\n");
        }
        StmtKind::For { var, lo, hi, body } => {
            let _ = writeln!(out, "FOR {} := {} TO {} DO", var.text, pretty_expr(lo), pretty_expr(hi));
            pretty_seq(body, depth + 1, out);
            indent(out, depth);
            out.push_str("END\n");
        }
        StmtKind::Some { var, lo, hi, body } => {
            let _ = writeln!(out, "SOME {} := {} TO {} DO", var.text, pretty_expr(lo), pretty_expr(hi));
            pretty_seq(body, depth + 1, out);
            indent(out, depth);
            out.push_str("END\n");
        }
        StmtKind::Either { branches } => {
            out.push_str("EITHER\n");
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    indent(out, depth);
                    out.push_str("ORELSE\n");
                }
                pretty_seq(b, depth + 1, out);
            }
            indent(out, depth);
            out.push_str("END\n");
        }
        StmtKind::Forall { generator, body } => {
            out.push_str("FORALL\n");
            pretty_seq(generator, depth + 1, out);
            indent(out, depth);
            out.push_str("DO\n");
            pretty_seq(body, depth + 1, out);
            indent(out, depth);
            out.push_str("END\n");
        }
        StmtKind::Commit { body } => {
            out.push_str("COMMIT\n");
            pretty_seq(body, depth + 1, out);
            indent(out, depth);
            out.push_str("END\n");
        }
        StmtKind::Not(inner) => {
            out.push_str("NOT\n");
            pretty_stmt(inner, depth + 1, out);
        }
        StmtKind::Return(value) => match value {
            None => out.push_str("RETURN\n"),
            Some(e) => {
                let _ = writeln!(out, "RETURN {}", pretty_expr(e));
            }
        },
        StmtKind::Write { items, newline } => {
            let name = if *newline { "WRITELN" } else { "WRITE" };
            if items.is_empty() {
                let _ = writeln!(out, "{}", name);
            } else {
                let args: Vec<String> = items.iter().map(pretty_expr).collect();
                let _ = writeln!(out, "{}({})", name, args.join(", "));
            }
        }
    }
}

fn pretty_type(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Integer => String::from("INTEGER"),
        TypeExpr::Boolean => String::from("BOOLEAN"),
        TypeExpr::Named(n) => n.text.clone(),
        TypeExpr::Enum(names) => {
            let list: Vec<&str> = names.iter().map(|n| n.text.as_str()).collect();
            alloc::format!("({})", list.join(", "))
        }
        TypeExpr::Subrange(lo, hi) => alloc::format!("[{}..{}]", pretty_expr(lo), pretty_expr(hi)),
        TypeExpr::Array { ranges, elem } => {
            let dims: Vec<String> = ranges
                .iter()
                .map(|(lo, hi)| alloc::format!("[{}..{}]", pretty_expr(lo), pretty_expr(hi)))
                .collect();
            alloc::format!("ARRAY {} OF {}", dims.join(", "), pretty_type(elem))
        }
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    pretty_expr_prec(e, 0)
}

fn pretty_expr_prec(e: &Expr, parent: u8) -> String {
    match &e.kind {
        ExprKind::Int(v) => alloc::format!("{}", v),
        ExprKind::Bool(true) => String::from("TRUE"),
        ExprKind::Bool(false) => String::from("FALSE"),
        ExprKind::Str(s) => alloc::format!("'{}'", s),
        ExprKind::Designator { base, indices } => {
            if indices.is_empty() {
                base.text.clone()
            } else {
                let idx: Vec<String> = indices.iter().map(pretty_expr).collect();
                alloc::format!("{}[{}]", base.text, idx.join(","))
            }
        }
        ExprKind::Call { callee, args } => {
            let list: Vec<String> = args.iter().map(pretty_expr).collect();
            alloc::format!("{}({})", callee.text, list.join(", "))
        }
        ExprKind::Unary { op, operand } => {
            let inner = pretty_expr_prec(operand, 4);
            match op {
                UnOp::Neg => alloc::format!("-{}", inner),
                UnOp::Not => alloc::format!("NOT {}", inner),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let text = alloc::format!(
                "{} {} {}",
                pretty_expr_prec(lhs, p),
                op.symbol(),
                pretty_expr_prec(rhs, p + 1)
            );
            if p < parent {
                alloc::format!("({})", text)
            } else {
                text
            }
        }
        ExprKind::Known(d) => alloc::format!("KNOWN({})", pretty_expr(d)),
    }
}
