//! The checked, lowered program the engine executes.
//!
//! Names are resolved to frame slots, constants are folded, and every
//! procedure call has been hoisted to statement position, so the expressions
//! that remain are call-free and evaluate without creating choice points.

use alloc::string::String;
use alloc::vec::Vec;

use crate::span::Span;

pub type EnumId = u16;
pub type ProcId = u32;

#[derive(Clone, Debug)]
pub struct Program {
    pub name: String,
    pub enums: Vec<EnumType>,
    pub globals: SlotLayout,
    pub procs: Vec<Proc>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug)]
pub struct EnumType {
    pub name: String,
    pub variants: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Proc {
    pub name: String,
    pub params: Vec<Param>,
    pub result: Option<SlotTy>,
    pub slots: SlotLayout,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Param {
    pub mode: Mode,
    pub ty: SlotTy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Value,
    Var,
    Mix,
}

#[derive(Clone, Debug, Default)]
pub struct SlotLayout {
    pub slots: Vec<SlotDecl>,
}

#[derive(Clone, Debug)]
pub struct SlotDecl {
    pub name: String,
    pub ty: SlotTy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlotTy {
    Simple(CellTy),
    Array(ArrayTy),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayTy {
    pub dims: Vec<(i64, i64)>,
    pub elem: CellTy,
}

impl ArrayTy {
    pub fn cell_count(&self) -> usize {
        self.dims
            .iter()
            .map(|(lo, hi)| (hi - lo + 1) as usize)
            .product()
    }
}

/// The runtime constraint attached to each storage cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellTy {
    Int,
    /// Integer restricted to an inclusive subrange.
    IntRange(i64, i64),
    Bool,
    Enum(EnumId),
}

impl CellTy {
    /// The unconstrained category used for operand compatibility checks.
    pub fn category(self) -> Category {
        match self {
            CellTy::Int | CellTy::IntRange(..) => Category::Int,
            CellTy::Bool => Category::Bool,
            CellTy::Enum(id) => Category::Enum(id),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Int,
    Bool,
    Enum(EnumId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotRef {
    Global(u32),
    Local(u32),
}

#[derive(Clone, Debug)]
pub struct Designator {
    pub base: SlotRef,
    /// Index expressions, one per array dimension; empty for simple variables
    /// and for whole-array references.
    pub indices: Vec<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Stmt {
    Assign { dest: Designator, src: Expr, span: Span },
    /// Whole-array assignment; copies cell states verbatim, including Unknown.
    ArrayCopy { dest: Designator, src: Designator, span: Span },
    /// Generalized equality in statement position.
    Equal { lhs: Expr, rhs: Expr, span: Span },
    /// A boolean expression in statement position; FALSE is failure.
    Test { expr: Expr, span: Span },
    If { cond: Expr, then_branch: Vec<Stmt>, else_branch: Vec<Stmt>, span: Span },
    While { cond_pre: Vec<Stmt>, cond: Expr, body: Vec<Stmt>, span: Span },
    For { var: SlotRef, lo: Expr, hi: Expr, body: Vec<Stmt>, span: Span },
    Some { var: SlotRef, lo: Expr, hi: Expr, body: Vec<Stmt>, span: Span },
    Either { branches: Vec<Vec<Stmt>>, span: Span },
    Forall { generator: Vec<Stmt>, body: Vec<Stmt>, span: Span },
    Commit { body: Vec<Stmt>, span: Span },
    Not { body: Vec<Stmt>, span: Span },
    Call { proc: ProcId, args: Vec<Arg>, dest: Option<Designator>, span: Span },
    Write { items: Vec<WriteItem>, newline: bool, span: Span },
    Builtin { which: BuiltinProc, args: Vec<Designator>, span: Span },
    Return { value: Option<RetValue>, span: Span },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Assign { span, .. }
            | Stmt::ArrayCopy { span, .. }
            | Stmt::Equal { span, .. }
            | Stmt::Test { span, .. }
            | Stmt::If { span, .. }
            | Stmt::While { span, .. }
            | Stmt::For { span, .. }
            | Stmt::Some { span, .. }
            | Stmt::Either { span, .. }
            | Stmt::Forall { span, .. }
            | Stmt::Commit { span, .. }
            | Stmt::Not { span, .. }
            | Stmt::Call { span, .. }
            | Stmt::Write { span, .. }
            | Stmt::Builtin { span, .. }
            | Stmt::Return { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Arg {
    /// Simple value parameter: evaluated, must be known, copied.
    Value(Expr),
    /// Array value parameter: the actual's cells are copied verbatim.
    ValueArray(Designator),
    /// VAR parameter (simple or array) and MIX with a variable actual:
    /// the slot aliases the actual's storage.
    Ref(Designator),
    /// MIX with a non-variable actual: a fresh cell holding the value.
    MixValue(Expr),
}

#[derive(Clone, Debug)]
pub enum RetValue {
    Simple(Expr),
    Array(Designator),
}

#[derive(Clone, Debug)]
pub enum WriteItem {
    Str(String),
    Value(Expr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinProc {
    /// Print a simple value, a 1-d row, or a 2-d board; `.` marks Unknown.
    Print,
    /// Print the timetable matrix (second argument) as rows of 0/1.
    PrintSolution,
    /// Load the fixed small timetabling instance into the four arguments.
    Initialize,
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    EnumConst(EnumId, u32),
    Load(Designator),
    Unary { op: UnOp, operand: alloc::boxed::Box<Expr> },
    Binary { op: BinOp, lhs: alloc::boxed::Box<Expr>, rhs: alloc::boxed::Box<Expr> },
    Known(Designator),
}

pub use crate::ast::{BinOp, UnOp};
