//! The execution engine: a small machine with explicit continuation frames,
//! a choice-point stack, and the store's trail for state restoration.
//!
//! Control alternates between executing a statement list, applying a
//! continuation after a success, and backtracking after a failure. Choice
//! points capture the continuation of the whole computation from the choice
//! site (including pending caller frames, so alternatives inside a procedure
//! body stay live after it returns), plus a trail mark and a cell watermark.
//! Resuming one first rolls the trail back to the mark, then runs the next
//! alternative under the captured continuation.
//!
//! FORALL keeps a side log of the mutations its DO-part performs. Those
//! writes are exempt from generator-driven undo; when the generator is
//! exhausted the engine merges the generator's trail segment with the side
//! log in reverse stamp order, restoring generator mutations while freezing
//! every body-written cell at its last body value. Synthetic trail entries
//! recording the entry-state of the frozen cells keep outer backtracking
//! exact.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::builtins;
use crate::program::*;
use crate::span::Span;
use crate::store::{ArrayObj, CellIdx, CellState, Frame, FrameRef, Slot, Store, Value};

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_steps: u64,
    pub max_choicepoints: usize,
    pub max_solutions: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 50_000_000,
            max_choicepoints: 1_000_000,
            max_solutions: u64::MAX,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RtKind {
    Uninitialized,
    BothSidesUnknown,
    Range,
    Index,
    Overflow,
    DivisionByZero,
    StepLimit,
    ChoicePointLimit,
    SolutionLimit,
    MissingReturn,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuntimeError {
    pub kind: RtKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RuntimeError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunResult {
    Succeeded,
    Failed,
    Error(RuntimeError),
}

impl RunResult {
    pub fn succeeded(&self) -> bool {
        matches!(self, RunResult::Succeeded)
    }
}

/// Execute a resolved program, streaming output into `out`.
pub fn run(prog: &Program, limits: Limits, out: &mut dyn fmt::Write) -> RunResult {
    run_inner(prog, limits, out, None)
}

/// Like [`run`], with one `EVENT ...` line per engine event written to `trace`.
pub fn run_traced(
    prog: &Program,
    limits: Limits,
    out: &mut dyn fmt::Write,
    trace: &mut dyn fmt::Write,
) -> RunResult {
    run_inner(prog, limits, out, Some(trace))
}

fn run_inner<'io>(
    prog: &Program,
    limits: Limits,
    out: &'io mut dyn fmt::Write,
    trace: Option<&'io mut dyn fmt::Write>,
) -> RunResult {
    let mut store = Store::new();
    let globals = Rc::new(alloc_frame(&mut store, &prog.globals));
    let mut machine = Machine {
        prog,
        store,
        globals,
        cps: Vec::new(),
        foralls: Vec::new(),
        ret: None,
        steps: 0,
        solutions: 0,
        limits,
        out,
        trace,
    };
    match machine.exec() {
        Ok(true) => RunResult::Succeeded,
        Ok(false) => RunResult::Failed,
        Err(e) => RunResult::Error(e),
    }
}

fn alloc_frame<'p>(store: &mut Store, layout: &'p SlotLayout) -> Frame<'p> {
    let mut slots = Vec::with_capacity(layout.slots.len());
    for decl in &layout.slots {
        slots.push(alloc_slot(store, &decl.ty));
    }
    Frame { slots }
}

fn alloc_slot<'p>(store: &mut Store, ty: &'p SlotTy) -> Slot<'p> {
    match ty {
        SlotTy::Simple(ct) => Slot::Cell(store.alloc(*ct, 1)),
        SlotTy::Array(at) => Slot::Array(ArrayObj {
            base: store.alloc(at.elem, at.cell_count()),
            ty: at,
        }),
    }
}

// ---------------------------------------------------------------------------
// continuations and choice points
// ---------------------------------------------------------------------------

type Kont<'p> = Rc<KFrame<'p>>;

enum KFrame<'p> {
    Done,
    Seq {
        stmts: &'p [Stmt],
        env: FrameRef<'p>,
        next: Kont<'p>,
    },
    ForNext {
        cell: CellIdx,
        next_val: i64,
        hi: i64,
        body: &'p [Stmt],
        env: FrameRef<'p>,
        span: Span,
        next: Kont<'p>,
    },
    /// While: condition pre-statements have run; evaluate the condition.
    WhileTest {
        node: &'p Stmt,
        env: FrameRef<'p>,
        next: Kont<'p>,
    },
    /// While: the body finished; start the next iteration.
    WhileAgain {
        node: &'p Stmt,
        env: FrameRef<'p>,
        next: Kont<'p>,
    },
    /// Commit: the body succeeded; drop the choice points it created.
    CommitDone { cp_base: usize, next: Kont<'p> },
    /// Not: the body succeeded; undo its effects and fail.
    NotSucceeded {
        barrier: usize,
        mark: usize,
        watermark: CellIdx,
        span: Span,
    },
    /// Forall: the generator succeeded; run the DO-part.
    ForallBody { ctx: usize },
    /// Forall: the DO-part succeeded; fold its effects and resume the search.
    ForallBodyDone { ctx: usize },
    CallReturn {
        proc: ProcId,
        caller_env: FrameRef<'p>,
        dest: Option<&'p Designator>,
        span: Span,
        next: Kont<'p>,
    },
}

enum ChoicePoint<'p> {
    Some {
        cell: CellIdx,
        next_val: i64,
        hi: i64,
        body: &'p [Stmt],
        env: FrameRef<'p>,
        kont: Kont<'p>,
        mark: usize,
        watermark: CellIdx,
        span: Span,
    },
    Either {
        branches: &'p [Vec<Stmt>],
        next: usize,
        env: FrameRef<'p>,
        kont: Kont<'p>,
        mark: usize,
        watermark: CellIdx,
        span: Span,
    },
    /// Popped when a NOT body is exhausted: the negation succeeds.
    NotBarrier {
        mark: usize,
        watermark: CellIdx,
        kont: Kont<'p>,
        span: Span,
    },
    /// Popped when a FORALL generator is exhausted: finalize and succeed.
    ForallBarrier { ctx: usize },
    /// Popped when a FORALL DO-part fails: the whole FORALL fails.
    ForallAbort { ctx: usize },
}

/// One DO-part write: the trail record plus the value the write installed,
/// captured when the body run completes. The installed value is what the
/// cell must hold after exhaustion if this is the cell's last body write;
/// the store itself cannot be trusted for that, because generator-driven
/// undo may legitimately rewrite the cell during the remaining search.
#[derive(Clone, Copy, Debug)]
struct BodyEntry {
    cell: CellIdx,
    prior: CellState,
    stamp: u64,
    installed: CellState,
}

struct ForallCtx<'p> {
    entry_mark: usize,
    watermark: CellIdx,
    cp_base: usize,
    kont: Kont<'p>,
    env: FrameRef<'p>,
    body: &'p [Stmt],
    body_log: Vec<BodyEntry>,
    body_base: usize,
    body_watermark: CellIdx,
    body_cp_base: usize,
    span: Span,
}

enum Control<'p> {
    Seq(&'p [Stmt], FrameRef<'p>, Kont<'p>),
    Apply(Kont<'p>),
    Fail,
}

enum Place<'p> {
    Cell(CellIdx),
    Array(ArrayObj<'p>),
}

struct Machine<'p, 'io> {
    prog: &'p Program,
    store: Store,
    globals: FrameRef<'p>,
    cps: Vec<ChoicePoint<'p>>,
    foralls: Vec<ForallCtx<'p>>,
    ret: Option<RetPayload>,
    steps: u64,
    solutions: u64,
    limits: Limits,
    out: &'io mut dyn fmt::Write,
    trace: Option<&'io mut dyn fmt::Write>,
}

enum RetPayload {
    Simple(Value),
    Array { base: CellIdx, count: usize },
}

fn rt(kind: RtKind, span: Span, message: impl Into<String>) -> RuntimeError {
    RuntimeError { kind, span, message: message.into() }
}

impl<'p, 'io> Machine<'p, 'io> {
    fn exec(&mut self) -> Result<bool, RuntimeError> {
        let mut control = Control::Seq(
            &self.prog.body,
            self.globals.clone(),
            Rc::new(KFrame::Done),
        );
        loop {
            control = match control {
                Control::Seq(stmts, env, k) => match stmts.split_first() {
                    None => Control::Apply(k),
                    Some((s, rest)) => {
                        let k = if rest.is_empty() {
                            k
                        } else {
                            Rc::new(KFrame::Seq { stmts: rest, env: env.clone(), next: k })
                        };
                        self.step(s, env, k)?
                    }
                },
                Control::Apply(k) => {
                    if matches!(*k, KFrame::Done) {
                        return Ok(true);
                    }
                    self.apply(k)?
                }
                Control::Fail => {
                    if self.cps.is_empty() {
                        return Ok(false);
                    }
                    self.backtrack()?
                }
            };
        }
    }

    // -- statement dispatch --

    fn step(
        &mut self,
        s: &'p Stmt,
        env: FrameRef<'p>,
        k: Kont<'p>,
    ) -> Result<Control<'p>, RuntimeError> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(rt(
                RtKind::StepLimit,
                s.span(),
                format!("step limit of {} exceeded", self.limits.max_steps),
            ));
        }
        match s {
            Stmt::Assign { dest, src, span } => {
                let v = self.eval(src, &env)?;
                match self.resolve_place(dest, &env)? {
                    Place::Cell(cell) => self.write_checked(cell, v, *span)?,
                    Place::Array(_) => {
                        return Err(rt(RtKind::Internal, *span, "array in simple assignment"))
                    }
                }
                Ok(Control::Apply(k))
            }
            Stmt::ArrayCopy { dest, src, span } => {
                let dst = match self.resolve_place(dest, &env)? {
                    Place::Array(a) => a,
                    _ => return Err(rt(RtKind::Internal, *span, "array copy to non-array")),
                };
                let src = match self.resolve_place(src, &env)? {
                    Place::Array(a) => a,
                    _ => return Err(rt(RtKind::Internal, *span, "array copy from non-array")),
                };
                let n = dst.cell_count();
                for i in 0..n {
                    let state = self.store.state(src.base + i as CellIdx);
                    self.store.write_state(dst.base + i as CellIdx, state);
                }
                Ok(Control::Apply(k))
            }
            Stmt::Equal { lhs, rhs, span } => {
                if self.exec_equal(lhs, rhs, *span, &env)? {
                    Ok(Control::Apply(k))
                } else {
                    Ok(Control::Fail)
                }
            }
            Stmt::Test { expr, span } => match self.eval(expr, &env)? {
                Value::Bool(true) => Ok(Control::Apply(k)),
                Value::Bool(false) => Ok(Control::Fail),
                _ => Err(rt(RtKind::Internal, *span, "non-boolean test")),
            },
            Stmt::If { cond, then_branch, else_branch, span } => {
                match self.eval(cond, &env)? {
                    Value::Bool(true) => Ok(Control::Seq(then_branch, env, k)),
                    Value::Bool(false) => Ok(Control::Seq(else_branch, env, k)),
                    _ => Err(rt(RtKind::Internal, *span, "non-boolean condition")),
                }
            }
            Stmt::While { cond_pre, .. } => {
                let test = Rc::new(KFrame::WhileTest { node: s, env: env.clone(), next: k });
                if cond_pre.is_empty() {
                    Ok(Control::Apply(test))
                } else {
                    Ok(Control::Seq(cond_pre, env, test))
                }
            }
            Stmt::For { var, lo, hi, body, span } => {
                let lo = self.eval_int(lo, &env)?;
                let hi = self.eval_int(hi, &env)?;
                if lo > hi {
                    return Ok(Control::Apply(k));
                }
                let cell = self.slot_cell(&env, *var, *span)?;
                self.write_checked(cell, Value::Int(lo), *span)?;
                Ok(Control::Seq(
                    body,
                    env.clone(),
                    Rc::new(KFrame::ForNext {
                        cell,
                        next_val: lo + 1,
                        hi,
                        body,
                        env,
                        span: *span,
                        next: k,
                    }),
                ))
            }
            Stmt::Some { var, lo, hi, body, span } => {
                let lo = self.eval_int(lo, &env)?;
                let hi = self.eval_int(hi, &env)?;
                if lo > hi {
                    return Ok(Control::Fail);
                }
                let cell = self.slot_cell(&env, *var, *span)?;
                if lo < hi {
                    self.push_cp(ChoicePoint::Some {
                        cell,
                        next_val: lo + 1,
                        hi,
                        body,
                        env: env.clone(),
                        kont: k.clone(),
                        mark: self.store.mark(),
                        watermark: self.store.len() as CellIdx,
                        span: *span,
                    })?;
                    self.trace_event("choice", *span, "SOME");
                }
                self.write_checked(cell, Value::Int(lo), *span)?;
                Ok(Control::Seq(body, env, k))
            }
            Stmt::Either { branches, span } => {
                self.push_cp(ChoicePoint::Either {
                    branches,
                    next: 1,
                    env: env.clone(),
                    kont: k.clone(),
                    mark: self.store.mark(),
                    watermark: self.store.len() as CellIdx,
                    span: *span,
                })?;
                self.trace_event("choice", *span, "EITHER");
                Ok(Control::Seq(&branches[0], env, k))
            }
            Stmt::Forall { generator, body, span } => {
                let ctx = self.foralls.len();
                self.foralls.push(ForallCtx {
                    entry_mark: self.store.mark(),
                    watermark: self.store.len() as CellIdx,
                    cp_base: self.cps.len(),
                    kont: k,
                    env: env.clone(),
                    body,
                    body_log: Vec::new(),
                    body_base: 0,
                    body_watermark: 0,
                    body_cp_base: 0,
                    span: *span,
                });
                self.push_cp(ChoicePoint::ForallBarrier { ctx })?;
                Ok(Control::Seq(generator, env, Rc::new(KFrame::ForallBody { ctx })))
            }
            Stmt::Commit { body, span: _ } => {
                let done = Rc::new(KFrame::CommitDone { cp_base: self.cps.len(), next: k });
                Ok(Control::Seq(body, env, done))
            }
            Stmt::Not { body, span } => {
                let mark = self.store.mark();
                let watermark = self.store.len() as CellIdx;
                let barrier = self.cps.len();
                self.push_cp(ChoicePoint::NotBarrier { mark, watermark, kont: k, span: *span })?;
                Ok(Control::Seq(
                    body,
                    env,
                    Rc::new(KFrame::NotSucceeded { barrier, mark, watermark, span: *span }),
                ))
            }
            Stmt::Call { proc, args, dest, span } => {
                let callee = &self.prog.procs[*proc as usize];
                let frame = self.build_frame(callee, args, &env, *span)?;
                self.trace_event("call", *span, &callee.name);
                Ok(Control::Seq(
                    &callee.body,
                    Rc::new(frame),
                    Rc::new(KFrame::CallReturn {
                        proc: *proc,
                        caller_env: env,
                        dest: dest.as_ref(),
                        span: *span,
                        next: k,
                    }),
                ))
            }
            Stmt::Write { items, newline, span: _ } => {
                let mut text = String::new();
                for item in items {
                    match item {
                        WriteItem::Str(s) => text.push_str(s),
                        WriteItem::Value(e) => {
                            let v = self.eval(e, &env)?;
                            builtins::format_value(v, &self.prog.enums, &mut text);
                        }
                    }
                }
                if *newline {
                    text.push('\n');
                }
                let _ = self.out.write_str(&text);
                Ok(Control::Apply(k))
            }
            Stmt::Builtin { which, args, span } => {
                self.exec_builtin(*which, args, &env, *span)?;
                Ok(Control::Apply(k))
            }
            Stmt::Return { value, span } => {
                let payload = match value {
                    None => None,
                    Some(RetValue::Simple(e)) => Some(RetPayload::Simple(self.eval(e, &env)?)),
                    Some(RetValue::Array(d)) => match self.resolve_place(d, &env)? {
                        Place::Array(a) => Some(RetPayload::Array {
                            base: a.base,
                            count: a.cell_count(),
                        }),
                        Place::Cell(_) => {
                            return Err(rt(RtKind::Internal, *span, "array return of non-array"))
                        }
                    },
                };
                // transfer control to the innermost call frame, discarding
                // sequencing frames but no choice points
                let mut cur = k;
                loop {
                    cur = match &*cur {
                        KFrame::CallReturn { .. } => {
                            self.ret = payload;
                            return Ok(Control::Apply(cur.clone()));
                        }
                        KFrame::Seq { next, .. }
                        | KFrame::ForNext { next, .. }
                        | KFrame::WhileTest { next, .. }
                        | KFrame::WhileAgain { next, .. }
                        | KFrame::CommitDone { next, .. } => next.clone(),
                        _ => {
                            return Err(rt(
                                RtKind::Internal,
                                *span,
                                "RETURN crossed an execution barrier",
                            ))
                        }
                    };
                }
            }
        }
    }

    // -- continuation application --

    fn apply(&mut self, k: Kont<'p>) -> Result<Control<'p>, RuntimeError> {
        match &*k {
            KFrame::Done => Ok(Control::Apply(k)),
            KFrame::Seq { stmts, env, next } => {
                Ok(Control::Seq(stmts, env.clone(), next.clone()))
            }
            KFrame::ForNext { cell, next_val, hi, body, env, span, next } => {
                if *next_val > *hi {
                    return Ok(Control::Apply(next.clone()));
                }
                self.write_checked(*cell, Value::Int(*next_val), *span)?;
                Ok(Control::Seq(
                    body,
                    env.clone(),
                    Rc::new(KFrame::ForNext {
                        cell: *cell,
                        next_val: *next_val + 1,
                        hi: *hi,
                        body,
                        env: env.clone(),
                        span: *span,
                        next: next.clone(),
                    }),
                ))
            }
            KFrame::WhileTest { node, env, next } => {
                let (cond, body) = match node {
                    Stmt::While { cond, body, .. } => (cond, body),
                    _ => unreachable!(),
                };
                match self.eval(cond, env)? {
                    Value::Bool(true) => Ok(Control::Seq(
                        body,
                        env.clone(),
                        Rc::new(KFrame::WhileAgain {
                            node,
                            env: env.clone(),
                            next: next.clone(),
                        }),
                    )),
                    Value::Bool(false) => Ok(Control::Apply(next.clone())),
                    _ => Err(rt(RtKind::Internal, node.span(), "non-boolean condition")),
                }
            }
            KFrame::WhileAgain { node, env, next } => {
                let cond_pre = match node {
                    Stmt::While { cond_pre, .. } => cond_pre,
                    _ => unreachable!(),
                };
                let test = Rc::new(KFrame::WhileTest {
                    node,
                    env: env.clone(),
                    next: next.clone(),
                });
                if cond_pre.is_empty() {
                    Ok(Control::Apply(test))
                } else {
                    Ok(Control::Seq(cond_pre, env.clone(), test))
                }
            }
            KFrame::CommitDone { cp_base, next } => {
                self.cps.truncate(*cp_base);
                Ok(Control::Apply(next.clone()))
            }
            KFrame::NotSucceeded { barrier, mark, watermark, span } => {
                self.cps.truncate(*barrier);
                self.undo_to(*mark, *span);
                self.store.truncate_cells(*watermark);
                Ok(Control::Fail)
            }
            KFrame::ForallBody { ctx } => {
                self.solutions += 1;
                if self.solutions > self.limits.max_solutions {
                    let span = self.foralls[*ctx].span;
                    return Err(rt(
                        RtKind::SolutionLimit,
                        span,
                        format!("solution limit of {} exceeded", self.limits.max_solutions),
                    ));
                }
                let (body, env) = {
                    let f = &mut self.foralls[*ctx];
                    f.body_base = self.store.trail_len();
                    f.body_watermark = self.store.len() as CellIdx;
                    f.body_cp_base = self.cps.len();
                    (f.body, f.env.clone())
                };
                self.push_cp(ChoicePoint::ForallAbort { ctx: *ctx })?;
                Ok(Control::Seq(
                    body,
                    env,
                    Rc::new(KFrame::ForallBodyDone { ctx: *ctx }),
                ))
            }
            KFrame::ForallBodyDone { ctx } => {
                let f = &mut self.foralls[*ctx];
                // discard DO-part choice points (and the abort barrier), move
                // its surviving writes to pre-existing cells into the side log
                self.cps.truncate(f.body_cp_base);
                let run_entries = self.store.split_off(f.body_base);
                let watermark = f.watermark;
                // walking backwards, the value a write installed is the prior
                // of the cell's next entry, or its current state for the last
                let mut next_prior: alloc::collections::BTreeMap<CellIdx, CellState> =
                    alloc::collections::BTreeMap::new();
                let mut annotated: Vec<BodyEntry> = Vec::with_capacity(run_entries.len());
                for e in run_entries.iter().rev() {
                    let installed = next_prior
                        .get(&e.cell)
                        .copied()
                        .unwrap_or_else(|| self.store.state(e.cell));
                    next_prior.insert(e.cell, e.prior);
                    if e.cell < watermark {
                        annotated.push(BodyEntry {
                            cell: e.cell,
                            prior: e.prior,
                            stamp: e.stamp,
                            installed,
                        });
                    }
                }
                annotated.reverse();
                f.body_log.extend(annotated);
                let body_watermark = f.body_watermark;
                self.store.truncate_cells(body_watermark);
                Ok(Control::Fail)
            }
            KFrame::CallReturn { proc, caller_env, dest, span, next } => {
                let callee = &self.prog.procs[*proc as usize];
                let payload = self.ret.take();
                if callee.result.is_some() && payload.is_none() {
                    return Err(rt(
                        RtKind::MissingReturn,
                        *span,
                        format!("function '{}' finished without RETURN", callee.name),
                    ));
                }
                match (payload, dest) {
                    (None, None) => {}
                    (Some(RetPayload::Simple(v)), Some(d)) => {
                        match self.resolve_place(d, caller_env)? {
                            Place::Cell(cell) => self.write_checked(cell, v, *span)?,
                            Place::Array(_) => {
                                return Err(rt(
                                    RtKind::Internal,
                                    *span,
                                    "simple result assigned to array",
                                ))
                            }
                        }
                    }
                    (Some(RetPayload::Array { base, count }), Some(d)) => {
                        match self.resolve_place(d, caller_env)? {
                            Place::Array(a) => {
                                for i in 0..count {
                                    let state = self.store.state(base + i as CellIdx);
                                    self.store.write_state(a.base + i as CellIdx, state);
                                }
                            }
                            Place::Cell(_) => {
                                return Err(rt(
                                    RtKind::Internal,
                                    *span,
                                    "array result assigned to simple variable",
                                ))
                            }
                        }
                    }
                    (None, Some(_)) => {
                        return Err(rt(RtKind::Internal, *span, "missing call result"))
                    }
                    (Some(_), None) => {
                        return Err(rt(RtKind::Internal, *span, "unexpected call result"))
                    }
                }
                self.trace_event("return", *span, &callee.name);
                Ok(Control::Apply(next.clone()))
            }
        }
    }

    // -- backtracking --

    fn backtrack(&mut self) -> Result<Control<'p>, RuntimeError> {
        loop {
            let cp = match self.cps.last_mut() {
                None => return Ok(Control::Fail),
                Some(cp) => cp,
            };
            match cp {
                ChoicePoint::Some {
                    cell,
                    next_val,
                    hi,
                    body,
                    env,
                    kont,
                    mark,
                    watermark,
                    span,
                } => {
                    let cell = *cell;
                    let val = *next_val;
                    let mark = *mark;
                    let watermark = *watermark;
                    let span = *span;
                    let body = *body;
                    let env = env.clone();
                    let kont = kont.clone();
                    *next_val += 1;
                    let exhausted = val >= *hi;
                    if exhausted {
                        self.cps.pop();
                    }
                    self.undo_to(mark, span);
                    self.store.truncate_cells(watermark);
                    self.trace_event("backtrack", span, "SOME");
                    self.write_checked(cell, Value::Int(val), span)?;
                    return Ok(Control::Seq(body, env, kont));
                }
                ChoicePoint::Either {
                    branches,
                    next,
                    env,
                    kont,
                    mark,
                    watermark,
                    span,
                } => {
                    let branch = *next;
                    let mark = *mark;
                    let watermark = *watermark;
                    let span = *span;
                    let branches = *branches;
                    let env = env.clone();
                    let kont = kont.clone();
                    *next += 1;
                    if branch + 1 >= branches.len() {
                        self.cps.pop();
                    }
                    self.undo_to(mark, span);
                    self.store.truncate_cells(watermark);
                    self.trace_event("backtrack", span, "EITHER");
                    return Ok(Control::Seq(&branches[branch], env, kont));
                }
                ChoicePoint::NotBarrier { mark, watermark, kont, span } => {
                    let mark = *mark;
                    let watermark = *watermark;
                    let span = *span;
                    let kont = kont.clone();
                    self.cps.pop();
                    self.undo_to(mark, span);
                    self.store.truncate_cells(watermark);
                    return Ok(Control::Apply(kont));
                }
                ChoicePoint::ForallBarrier { ctx } => {
                    let ctx = *ctx;
                    self.cps.pop();
                    let kont = self.finish_forall(ctx);
                    return Ok(Control::Apply(kont));
                }
                ChoicePoint::ForallAbort { ctx } => {
                    let ctx = *ctx;
                    self.cps.pop();
                    self.abort_forall(ctx);
                    // the whole FORALL fails; keep backtracking
                }
            }
        }
    }

    /// Generator exhausted: undo its mutations while pinning each DO-part
    /// written cell at the value its last body write installed, then leave
    /// synthetic trail entries so outer backtracking still restores the
    /// entry state.
    fn finish_forall(&mut self, ctx: usize) -> Kont<'p> {
        debug_assert_eq!(ctx + 1, self.foralls.len());
        let f = self.foralls.pop().unwrap();
        let gen_entries = self.store.split_off(f.entry_mark);
        let body_entries = f.body_log;

        let mut frozen: BTreeSet<CellIdx> = BTreeSet::new();
        let mut gi = gen_entries.len();
        let mut bi = body_entries.len();
        while gi > 0 || bi > 0 {
            let take_gen = match (gi, bi) {
                (0, _) => false,
                (_, 0) => true,
                _ => gen_entries[gi - 1].stamp > body_entries[bi - 1].stamp,
            };
            if take_gen {
                gi -= 1;
                let e = &gen_entries[gi];
                if !frozen.contains(&e.cell) {
                    self.store.restore_raw(e.cell, e.prior);
                }
            } else {
                bi -= 1;
                let e = &body_entries[bi];
                if frozen.insert(e.cell) {
                    self.store.restore_raw(e.cell, e.installed);
                }
            }
        }

        // entry-state of each frozen cell = prior of its chronologically
        // first entry in the merged sequence
        let mut synthetics: Vec<(CellIdx, CellState)> = Vec::new();
        let mut seen: BTreeSet<CellIdx> = BTreeSet::new();
        let mut gi = 0;
        let mut bi = 0;
        while gi < gen_entries.len() || bi < body_entries.len() {
            let gen_stamp = gen_entries.get(gi).map(|e| e.stamp);
            let body_stamp = body_entries.get(bi).map(|e| e.stamp);
            let take_gen = match (gen_stamp, body_stamp) {
                (Some(g), Some(b)) => g < b,
                (Some(_), None) => true,
                _ => false,
            };
            let (cell, prior) = if take_gen {
                gi += 1;
                (gen_entries[gi - 1].cell, gen_entries[gi - 1].prior)
            } else {
                bi += 1;
                (body_entries[bi - 1].cell, body_entries[bi - 1].prior)
            };
            if frozen.contains(&cell) && seen.insert(cell) {
                synthetics.push((cell, prior));
            }
        }
        self.store.replace_suffix(f.entry_mark, &synthetics);
        self.store.truncate_cells(f.watermark);
        self.trace_event("undo", f.span, "FORALL exhausted");
        f.kont
    }

    /// DO-part failure: the FORALL fails as a whole; restore the entry state
    /// exactly by undoing the generator trail segment, the accumulated body
    /// log, and the current body run, merged in reverse stamp order.
    fn abort_forall(&mut self, ctx: usize) {
        debug_assert_eq!(ctx + 1, self.foralls.len());
        let f = self.foralls.pop().unwrap();
        let main_entries = self.store.split_off(f.entry_mark);
        let body_entries = f.body_log;
        let mut gi = main_entries.len();
        let mut bi = body_entries.len();
        while gi > 0 || bi > 0 {
            let take_main = match (gi, bi) {
                (0, _) => false,
                (_, 0) => true,
                _ => main_entries[gi - 1].stamp > body_entries[bi - 1].stamp,
            };
            let (cell, prior) = if take_main {
                gi -= 1;
                (main_entries[gi].cell, main_entries[gi].prior)
            } else {
                bi -= 1;
                (body_entries[bi].cell, body_entries[bi].prior)
            };
            self.store.restore_raw(cell, prior);
        }
        self.store.truncate_cells(f.watermark);
        self.cps.truncate(f.cp_base);
        self.trace_event("undo", f.span, "FORALL aborted");
    }

    // -- equality and calls --

    fn exec_equal(
        &mut self,
        lhs: &'p Expr,
        rhs: &'p Expr,
        span: Span,
        env: &FrameRef<'p>,
    ) -> Result<bool, RuntimeError> {
        enum SideState {
            Unbound(CellIdx),
            Val(Value),
        }
        let side = |m: &mut Self, e: &'p Expr| -> Result<SideState, RuntimeError> {
            if let ExprKind::Load(d) = &e.kind {
                let place = m.resolve_place(d, env)?;
                match place {
                    Place::Cell(cell) => {
                        return Ok(match m.store.state(cell) {
                            CellState::Unknown => SideState::Unbound(cell),
                            CellState::Known(v) => SideState::Val(v),
                        });
                    }
                    Place::Array(_) => {
                        return Err(rt(RtKind::Internal, span, "equality on arrays"))
                    }
                }
            }
            Ok(SideState::Val(m.eval(e, env)?))
        };
        let l = side(self, lhs)?;
        let r = side(self, rhs)?;
        match (l, r) {
            (SideState::Unbound(_), SideState::Unbound(_)) => Err(rt(
                RtKind::BothSidesUnknown,
                span,
                "both sides of '=' are uninitialized",
            )),
            (SideState::Unbound(cell), SideState::Val(v))
            | (SideState::Val(v), SideState::Unbound(cell)) => {
                self.write_checked(cell, v, span)?;
                self.trace_event("bind", span, "=");
                Ok(true)
            }
            (SideState::Val(a), SideState::Val(b)) => Ok(a == b),
        }
    }

    fn build_frame(
        &mut self,
        callee: &'p Proc,
        args: &'p [Arg],
        env: &FrameRef<'p>,
        span: Span,
    ) -> Result<Frame<'p>, RuntimeError> {
        let mut slots = Vec::with_capacity(callee.slots.slots.len());
        for (param, arg) in callee.params.iter().zip(args) {
            let slot = match arg {
                Arg::Value(e) => {
                    let v = self.eval(e, env)?;
                    let ct = match &param.ty {
                        SlotTy::Simple(ct) => *ct,
                        SlotTy::Array(_) => {
                            return Err(rt(RtKind::Internal, span, "value array mismatch"))
                        }
                    };
                    let cell = self.store.alloc(ct, 1);
                    self.init_checked(cell, v, e.span)?;
                    Slot::Cell(cell)
                }
                Arg::ValueArray(d) => {
                    let src = match self.resolve_place(d, env)? {
                        Place::Array(a) => a,
                        _ => return Err(rt(RtKind::Internal, span, "array argument mismatch")),
                    };
                    let at = match &param.ty {
                        SlotTy::Array(at) => at,
                        _ => return Err(rt(RtKind::Internal, span, "array argument mismatch")),
                    };
                    let n = src.cell_count();
                    let base = self.store.alloc(at.elem, n);
                    for i in 0..n {
                        let state = self.store.state(src.base + i as CellIdx);
                        self.store.init(base + i as CellIdx, state);
                    }
                    Slot::Array(ArrayObj { base, ty: at })
                }
                Arg::Ref(d) => match self.resolve_place(d, env)? {
                    Place::Cell(cell) => Slot::Cell(cell),
                    Place::Array(a) => Slot::Array(a),
                },
                Arg::MixValue(e) => {
                    let v = self.eval(e, env)?;
                    let ct = match &param.ty {
                        SlotTy::Simple(ct) => *ct,
                        SlotTy::Array(_) => {
                            return Err(rt(RtKind::Internal, span, "MIX array parameter"))
                        }
                    };
                    let cell = self.store.alloc(ct, 1);
                    self.init_checked(cell, v, e.span)?;
                    Slot::Cell(cell)
                }
            };
            slots.push(slot);
        }
        for decl in callee.slots.slots.iter().skip(args.len()) {
            slots.push(alloc_slot(&mut self.store, &decl.ty));
        }
        Ok(Frame { slots })
    }

    fn exec_builtin(
        &mut self,
        which: BuiltinProc,
        args: &'p [Designator],
        env: &FrameRef<'p>,
        span: Span,
    ) -> Result<(), RuntimeError> {
        match which {
            BuiltinProc::Print => {
                let mut text = String::new();
                match self.resolve_place(&args[0], env)? {
                    Place::Cell(cell) => {
                        builtins::format_cell(self.store.state(cell), &self.prog.enums, &mut text);
                        text.push('\n');
                    }
                    Place::Array(a) => {
                        let dims = &a.ty.dims;
                        if dims.len() == 1 {
                            let n = a.cell_count();
                            builtins::format_row(
                                (0..n).map(|i| self.store.state(a.base + i as CellIdx)),
                                &self.prog.enums,
                                &mut text,
                            );
                        } else {
                            let rows = (dims[0].1 - dims[0].0 + 1) as usize;
                            let cols = (dims[1].1 - dims[1].0 + 1) as usize;
                            for r in 0..rows {
                                builtins::format_row(
                                    (0..cols).map(|c| {
                                        self.store.state(a.base + (r * cols + c) as CellIdx)
                                    }),
                                    &self.prog.enums,
                                    &mut text,
                                );
                            }
                        }
                    }
                }
                let _ = self.out.write_str(&text);
            }
            BuiltinProc::PrintSolution => {
                let a = match self.resolve_place(&args[1], env)? {
                    Place::Array(a) => a,
                    _ => return Err(rt(RtKind::Internal, span, "PrintSolution argument")),
                };
                let rows = (a.ty.dims[0].1 - a.ty.dims[0].0 + 1) as usize;
                let cols = (a.ty.dims[1].1 - a.ty.dims[1].0 + 1) as usize;
                let mut text = String::new();
                for r in 0..rows {
                    for c in 0..cols {
                        if c > 0 {
                            text.push(' ');
                        }
                        builtins::format_cell_binary(
                            self.store.state(a.base + (r * cols + c) as CellIdx),
                            &mut text,
                        );
                    }
                    text.push('\n');
                }
                let _ = self.out.write_str(&text);
            }
            BuiltinProc::Initialize => {
                let mut arrays = Vec::new();
                for d in args {
                    match self.resolve_place(d, env)? {
                        Place::Array(a) => arrays.push(a),
                        _ => return Err(rt(RtKind::Internal, span, "Initialize argument")),
                    }
                }
                let q = builtins::INSTANCE_COURSES;
                let p = builtins::INSTANCE_PERIODS;
                // availability
                let avail = arrays[0];
                for c in 1..=q {
                    for per in 1..=p {
                        let idx = ((c - 1) * p + (per - 1)) as CellIdx;
                        let v = Value::Bool(builtins::instance_available(c, per));
                        self.store
                            .write(avail.base + idx, v)
                            .map_err(|e| rt(RtKind::Range, span, e.to_string()))?;
                    }
                }
                // conflicts (symmetric)
                let conflict = arrays[1];
                for i in 1..=q {
                    for j in 1..=q {
                        let hit = builtins::INSTANCE_CONFLICTS
                            .iter()
                            .any(|&(a, b)| (a == i && b == j) || (a == j && b == i));
                        let idx = ((i - 1) * q + (j - 1)) as CellIdx;
                        self.store
                            .write(conflict.base + idx, Value::Bool(hit))
                            .map_err(|e| rt(RtKind::Range, span, e.to_string()))?;
                    }
                }
                // requirements
                let reqs = arrays[2];
                for c in 1..=q {
                    self.store
                        .write(
                            reqs.base + (c - 1) as CellIdx,
                            Value::Int(builtins::INSTANCE_REQUIREMENTS[(c - 1) as usize]),
                        )
                        .map_err(|e| rt(RtKind::Range, span, e.to_string()))?;
                }
                // timetable, cleared
                let tt = arrays[3];
                for i in 0..tt.cell_count() {
                    self.store
                        .write(tt.base + i as CellIdx, Value::Bool(false))
                        .map_err(|e| rt(RtKind::Range, span, e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    // -- expression evaluation (call-free, pure) --

    fn eval(&self, e: &'p Expr, env: &Frame<'p>) -> Result<Value, RuntimeError> {
        match &e.kind {
            ExprKind::Int(v) => Ok(Value::Int(*v)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::EnumConst(ty, ord) => Ok(Value::Enum(*ty, *ord)),
            ExprKind::Load(d) => match self.resolve_place_in(d, env)? {
                Place::Cell(cell) => match self.store.state(cell) {
                    CellState::Known(v) => Ok(v),
                    CellState::Unknown => Err(rt(
                        RtKind::Uninitialized,
                        d.span,
                        "read of an uninitialized variable",
                    )),
                },
                Place::Array(_) => Err(rt(RtKind::Internal, d.span, "array read as value")),
            },
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand, env)?;
                match (op, v) {
                    (UnOp::Neg, Value::Int(i)) => i
                        .checked_neg()
                        .map(Value::Int)
                        .ok_or_else(|| rt(RtKind::Overflow, e.span, "integer overflow")),
                    (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    _ => Err(rt(RtKind::Internal, e.span, "bad unary operand")),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                // short-circuit boolean operators
                if matches!(op, BinOp::And | BinOp::Or) {
                    let l = match self.eval(lhs, env)? {
                        Value::Bool(b) => b,
                        _ => return Err(rt(RtKind::Internal, e.span, "bad AND/OR operand")),
                    };
                    if (*op == BinOp::And && !l) || (*op == BinOp::Or && l) {
                        return Ok(Value::Bool(l));
                    }
                    return match self.eval(rhs, env)? {
                        Value::Bool(b) => Ok(Value::Bool(b)),
                        _ => Err(rt(RtKind::Internal, e.span, "bad AND/OR operand")),
                    };
                }
                let l = self.eval(lhs, env)?;
                let r = self.eval(rhs, env)?;
                match op {
                    BinOp::Eq => Ok(Value::Bool(l == r)),
                    BinOp::NotEq => Ok(Value::Bool(l != r)),
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                        let (a, b) = match (l, r) {
                            (Value::Int(a), Value::Int(b)) => (a, b),
                            _ => return Err(rt(RtKind::Internal, e.span, "bad arithmetic operand")),
                        };
                        if matches!(op, BinOp::Div | BinOp::Mod) && b == 0 {
                            return Err(rt(RtKind::DivisionByZero, e.span, "division by zero"));
                        }
                        let v = match op {
                            BinOp::Add => a.checked_add(b),
                            BinOp::Sub => a.checked_sub(b),
                            BinOp::Mul => a.checked_mul(b),
                            BinOp::Div => a.checked_div(b),
                            BinOp::Mod => a.checked_rem(b),
                            _ => unreachable!(),
                        };
                        v.map(Value::Int)
                            .ok_or_else(|| rt(RtKind::Overflow, e.span, "integer overflow"))
                    }
                    BinOp::Less | BinOp::LessEq | BinOp::Greater | BinOp::GreaterEq => {
                        let (a, b) = match (l, r) {
                            (Value::Int(a), Value::Int(b)) => (a, b),
                            _ => return Err(rt(RtKind::Internal, e.span, "bad comparison operand")),
                        };
                        let res = match op {
                            BinOp::Less => a < b,
                            BinOp::LessEq => a <= b,
                            BinOp::Greater => a > b,
                            BinOp::GreaterEq => a >= b,
                            _ => unreachable!(),
                        };
                        Ok(Value::Bool(res))
                    }
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            ExprKind::Known(d) => match self.resolve_place_in(d, env)? {
                Place::Cell(cell) => Ok(Value::Bool(self.store.state(cell).is_known())),
                Place::Array(a) => {
                    let n = a.cell_count();
                    let all = (0..n).all(|i| self.store.state(a.base + i as CellIdx).is_known());
                    Ok(Value::Bool(all))
                }
            },
        }
    }

    fn eval_int(&self, e: &'p Expr, env: &Frame<'p>) -> Result<i64, RuntimeError> {
        match self.eval(e, env)? {
            Value::Int(v) => Ok(v),
            _ => Err(rt(RtKind::Internal, e.span, "integer expression expected")),
        }
    }

    // -- places and slots --

    fn resolve_place(
        &self,
        d: &'p Designator,
        env: &FrameRef<'p>,
    ) -> Result<Place<'p>, RuntimeError> {
        self.resolve_place_in(d, env)
    }

    fn resolve_place_in(
        &self,
        d: &'p Designator,
        env: &Frame<'p>,
    ) -> Result<Place<'p>, RuntimeError> {
        let slot = match d.base {
            SlotRef::Global(i) => self.globals.slots[i as usize],
            SlotRef::Local(i) => env.slots[i as usize],
        };
        match slot {
            Slot::Cell(cell) => Ok(Place::Cell(cell)),
            Slot::Array(a) => {
                if d.indices.is_empty() {
                    return Ok(Place::Array(a));
                }
                let mut idx = [0i64; 8];
                for (i, e) in d.indices.iter().enumerate() {
                    idx[i] = self.eval_int(e, env)?;
                }
                let cell = a
                    .flatten(&idx[..d.indices.len()])
                    .map_err(|m| rt(RtKind::Index, d.span, m))?;
                Ok(Place::Cell(cell))
            }
        }
    }

    fn slot_cell(
        &self,
        env: &Frame<'p>,
        r: SlotRef,
        span: Span,
    ) -> Result<CellIdx, RuntimeError> {
        let slot = match r {
            SlotRef::Global(i) => self.globals.slots[i as usize],
            SlotRef::Local(i) => env.slots[i as usize],
        };
        match slot {
            Slot::Cell(cell) => Ok(cell),
            Slot::Array(_) => Err(rt(RtKind::Internal, span, "array as control variable")),
        }
    }

    fn write_checked(
        &mut self,
        cell: CellIdx,
        v: Value,
        span: Span,
    ) -> Result<(), RuntimeError> {
        self.store
            .write(cell, v)
            .map_err(|e| rt(RtKind::Range, span, e.to_string()))
    }

    fn init_checked(&mut self, cell: CellIdx, v: Value, span: Span) -> Result<(), RuntimeError> {
        if let (CellTy::IntRange(lo, hi), Value::Int(i)) = (self.store.ty(cell), v) {
            if i < lo || i > hi {
                return Err(rt(
                    RtKind::Range,
                    span,
                    format!("value {} outside subrange [{}..{}]", i, lo, hi),
                ));
            }
        }
        self.store.init(cell, CellState::Known(v));
        Ok(())
    }

    fn push_cp(&mut self, cp: ChoicePoint<'p>) -> Result<(), RuntimeError> {
        if self.cps.len() >= self.limits.max_choicepoints {
            let span = match &cp {
                ChoicePoint::Some { span, .. }
                | ChoicePoint::Either { span, .. }
                | ChoicePoint::NotBarrier { span, .. } => *span,
                ChoicePoint::ForallBarrier { ctx } | ChoicePoint::ForallAbort { ctx } => {
                    self.foralls[*ctx].span
                }
            };
            return Err(rt(
                RtKind::ChoicePointLimit,
                span,
                format!("choice point limit of {} exceeded", self.limits.max_choicepoints),
            ));
        }
        self.cps.push(cp);
        Ok(())
    }

    fn undo_to(&mut self, mark: usize, span: Span) {
        let n = self.store.trail_len().saturating_sub(mark);
        if n > 0 {
            self.trace_event("undo", span, &format!("entries={}", n));
        }
        self.store.undo_to(mark);
    }

    fn trace_event(&mut self, kind: &str, span: Span, detail: &str) {
        if let Some(tr) = self.trace.as_deref_mut() {
            let _ = writeln!(tr, "EVENT kind={} loc={} detail={}", kind, span, detail);
        }
    }
}
