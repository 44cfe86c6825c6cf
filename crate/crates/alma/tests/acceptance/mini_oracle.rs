//! A miniature statement language with an independent reference evaluator,
//! used to cross-check the engine on randomized programs.
//!
//! The evaluator restores state by cloning at every alternative instead of
//! trailing, and searches via success continuations instead of an explicit
//! machine, so it shares no mechanism with the engine. Programs are emitted
//! as Alma-0 source and run through the full pipeline.

use proptest::prelude::*;

pub const NK: usize = 3; // known integer variables k0..k2
pub const NU: usize = 2; // initially-unknown variables u0..u1

#[derive(Clone, Debug)]
pub enum TExpr {
    Const(i64),
    Var(usize),
    Add(usize, i64),
}

#[derive(Clone, Copy, Debug)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
}

#[derive(Clone, Debug)]
pub enum TCond {
    True,
    False,
    Cmp(TExpr, Cmp, TExpr),
    KnownU(usize),
}

#[derive(Clone, Debug)]
pub enum TStmt {
    AssignK(usize, TExpr),
    /// `u<i> = expr`: binds when unknown, tests otherwise.
    BindU(usize, TExpr),
    Test(TCond),
    Mark(u8),
    Some(usize, i64, i64, Vec<TStmt>),
    For(usize, i64, i64, Vec<TStmt>),
    Either(Vec<Vec<TStmt>>),
    If(TCond, Vec<TStmt>, Vec<TStmt>),
    Not(Vec<TStmt>),
    Commit(Vec<TStmt>),
}

// ---------------------------------------------------------------------------
// oracle: clone-based backtracking evaluator
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Debug)]
pub struct St {
    pub k: [i64; NK],
    pub u: [Option<i64>; NU],
}

impl St {
    pub fn initial() -> St {
        St { k: [1, 2, 3], u: [None; NU] }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for v in self.k {
            s.push_str(&v.to_string());
            s.push(' ');
        }
        for u in self.u {
            match u {
                Some(v) => s.push_str(&v.to_string()),
                None => s.push('?'),
            }
            s.push(' ');
        }
        s.push('\n');
        s
    }
}

#[derive(PartialEq, Clone, Copy, Debug)]
pub enum Flow {
    Stop,
    Exhausted,
}

fn o_eval(e: &TExpr, st: &St) -> i64 {
    match e {
        TExpr::Const(v) => *v,
        TExpr::Var(i) => st.k[*i],
        TExpr::Add(i, c) => st.k[*i] + c,
    }
}

fn o_cond(c: &TCond, st: &St) -> bool {
    match c {
        TCond::True => true,
        TCond::False => false,
        TCond::Cmp(l, op, r) => {
            let (a, b) = (o_eval(l, st), o_eval(r, st));
            match op {
                Cmp::Eq => a == b,
                Cmp::Ne => a != b,
                Cmp::Lt => a < b,
                Cmp::Le => a <= b,
            }
        }
        TCond::KnownU(i) => st.u[*i].is_some(),
    }
}

pub fn o_seq(
    stmts: &[TStmt],
    st: &mut St,
    out: &mut String,
    k: &mut dyn FnMut(&mut St, &mut String) -> Flow,
) -> Flow {
    match stmts.split_first() {
        None => k(st, out),
        Some((s, rest)) => o_stmt(s, st, out, &mut |st, out| o_seq(rest, st, out, k)),
    }
}

fn o_stmt(
    s: &TStmt,
    st: &mut St,
    out: &mut String,
    k: &mut dyn FnMut(&mut St, &mut String) -> Flow,
) -> Flow {
    match s {
        TStmt::AssignK(i, e) => {
            st.k[*i] = o_eval(e, st);
            k(st, out)
        }
        TStmt::BindU(i, e) => {
            let v = o_eval(e, st);
            match st.u[*i] {
                None => {
                    st.u[*i] = Some(v);
                    k(st, out)
                }
                Some(cur) if cur == v => k(st, out),
                Some(_) => Flow::Exhausted,
            }
        }
        TStmt::Test(c) => {
            if o_cond(c, st) {
                k(st, out)
            } else {
                Flow::Exhausted
            }
        }
        TStmt::Mark(ch) => {
            out.push(*ch as char);
            k(st, out)
        }
        TStmt::Some(var, lo, hi, body) => {
            for val in *lo..=*hi {
                let snap = st.clone();
                st.k[*var] = val;
                if o_seq(body, st, out, k) == Flow::Stop {
                    return Flow::Stop;
                }
                *st = snap;
            }
            Flow::Exhausted
        }
        TStmt::For(var, lo, hi, body) => o_for(*var, *lo, *hi, body, st, out, k),
        TStmt::Either(branches) => {
            for b in branches {
                let snap = st.clone();
                if o_seq(b, st, out, k) == Flow::Stop {
                    return Flow::Stop;
                }
                *st = snap;
            }
            Flow::Exhausted
        }
        TStmt::If(c, t, e) => {
            if o_cond(c, st) {
                o_seq(t, st, out, k)
            } else {
                o_seq(e, st, out, k)
            }
        }
        TStmt::Not(body) => {
            let snap = st.clone();
            let r = o_seq(body, st, out, &mut |_, _| Flow::Stop);
            *st = snap;
            match r {
                Flow::Stop => Flow::Exhausted,
                Flow::Exhausted => k(st, out),
            }
        }
        TStmt::Commit(body) => match o_seq(body, st, out, &mut |_, _| Flow::Stop) {
            Flow::Stop => k(st, out),
            Flow::Exhausted => Flow::Exhausted,
        },
    }
}

fn o_for(
    var: usize,
    val: i64,
    hi: i64,
    body: &[TStmt],
    st: &mut St,
    out: &mut String,
    k: &mut dyn FnMut(&mut St, &mut String) -> Flow,
) -> Flow {
    if val > hi {
        return k(st, out);
    }
    st.k[var] = val;
    o_seq(body, st, out, &mut |st, out| {
        o_for(var, val + 1, hi, body, st, out, k)
    })
}

/// Run to the first success; on success the oracle's state print is appended.
pub fn oracle_run(prog: &[TStmt]) -> (bool, String) {
    let mut st = St::initial();
    let mut out = String::new();
    let flow = o_seq(prog, &mut st, &mut out, &mut |st, out| {
        out.push_str(&st.render());
        Flow::Stop
    });
    (flow == Flow::Stop, out)
}

/// Count all solutions of `gen`, also collecting output emitted during the
/// whole search.
pub fn oracle_count(gen: &[TStmt]) -> (u64, String) {
    let mut st = St::initial();
    let mut out = String::new();
    let mut count = 0u64;
    let _ = o_seq(gen, &mut st, &mut out, &mut |_, _| {
        count += 1;
        Flow::Exhausted
    });
    (count, out)
}

// ---------------------------------------------------------------------------
// source emission
// ---------------------------------------------------------------------------

fn src_expr(e: &TExpr) -> String {
    match e {
        TExpr::Const(v) => format!("{}", v),
        TExpr::Var(i) => format!("k{}", i),
        TExpr::Add(i, c) => {
            if *c < 0 {
                format!("k{} - {}", i, -c)
            } else {
                format!("k{} + {}", i, c)
            }
        }
    }
}

fn src_cond(c: &TCond) -> String {
    match c {
        TCond::True => "TRUE".to_string(),
        TCond::False => "FALSE".to_string(),
        TCond::Cmp(l, op, r) => {
            let op = match op {
                Cmp::Eq => "=",
                Cmp::Ne => "<>",
                Cmp::Lt => "<",
                Cmp::Le => "<=",
            };
            format!("({} {} {})", src_expr(l), op, src_expr(r))
        }
        TCond::KnownU(i) => format!("KNOWN(u{})", i),
    }
}

pub fn src_seq(stmts: &[TStmt], indent: usize, out: &mut String) {
    if stmts.is_empty() {
        push_stmt_line(out, indent, "TRUE", false);
        return;
    }
    for (idx, s) in stmts.iter().enumerate() {
        src_stmt(s, indent, out, idx + 1 < stmts.len());
    }
}

fn push_stmt_line(out: &mut String, indent: usize, text: &str, semi: bool) {
    for _ in 0..indent {
        out.push_str("  ");
    }
    out.push_str(text);
    if semi {
        out.push(';');
    }
    out.push('\n');
}

fn src_stmt(s: &TStmt, indent: usize, out: &mut String, semi: bool) {
    match s {
        TStmt::AssignK(i, e) => {
            push_stmt_line(out, indent, &format!("k{} := {}", i, src_expr(e)), semi)
        }
        TStmt::BindU(i, e) => {
            push_stmt_line(out, indent, &format!("u{} = {}", i, src_expr(e)), semi)
        }
        TStmt::Test(c) => push_stmt_line(out, indent, &src_cond(c), semi),
        TStmt::Mark(ch) => {
            push_stmt_line(out, indent, &format!("WRITE('{}')", *ch as char), semi)
        }
        TStmt::Some(var, lo, hi, body) => {
            push_stmt_line(out, indent, &format!("SOME k{} := {} TO {} DO", var, lo, hi), false);
            src_seq(body, indent + 1, out);
            push_stmt_line(out, indent, "END", semi);
        }
        TStmt::For(var, lo, hi, body) => {
            push_stmt_line(out, indent, &format!("FOR k{} := {} TO {} DO", var, lo, hi), false);
            src_seq(body, indent + 1, out);
            push_stmt_line(out, indent, "END", semi);
        }
        TStmt::Either(branches) => {
            push_stmt_line(out, indent, "EITHER", false);
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    push_stmt_line(out, indent, "ORELSE", false);
                }
                src_seq(b, indent + 1, out);
            }
            push_stmt_line(out, indent, "END", semi);
        }
        TStmt::If(c, t, e) => {
            push_stmt_line(out, indent, &format!("IF {} THEN", src_cond(c)), false);
            src_seq(t, indent + 1, out);
            if !e.is_empty() {
                push_stmt_line(out, indent, "ELSE", false);
                src_seq(e, indent + 1, out);
            }
            push_stmt_line(out, indent, "END", semi);
        }
        TStmt::Not(body) => {
            push_stmt_line(out, indent, "NOT", false);
            push_stmt_line(out, indent, "COMMIT", false);
            // NOT takes a single statement; COMMIT packages the sequence.
            // COMMIT inside NOT does not change NOT's outcome or effects.
            src_seq(body, indent + 1, out);
            push_stmt_line(out, indent, "END", semi);
        }
        TStmt::Commit(body) => {
            push_stmt_line(out, indent, "COMMIT", false);
            src_seq(body, indent + 1, out);
            push_stmt_line(out, indent, "END", semi);
        }
    }
}

/// Wrap a statement list into a full module with initialized k-vars and a
/// state print at the end.
pub fn emit_program(body: &[TStmt], epilogue: &str) -> String {
    let mut src = String::from(
        "MODULE t;\nVAR k0, k1, k2, u0, u1, n, n0, n1: INTEGER;\nBEGIN\n  k0 := 1; k1 := 2; k2 := 3;\n",
    );
    src_seq(body, 1, &mut src);
    if !epilogue.is_empty() {
        src.push_str(";\n");
        src.push_str(epilogue);
    }
    src.push_str("\nEND t.\n");
    src
}

/// Statements that print the full variable state in the oracle's format.
pub fn state_print() -> String {
    let mut s = String::new();
    for i in 0..NK {
        s.push_str(&format!("  WRITE(k{}); WRITE(' ');\n", i));
    }
    for i in 0..NU {
        s.push_str(&format!(
            "  IF KNOWN(u{}) THEN WRITE(u{}) ELSE WRITE('?') END; WRITE(' ');\n",
            i, i
        ));
    }
    s.push_str("  WRITELN");
    s
}

// ---------------------------------------------------------------------------
// statement strategies
// ---------------------------------------------------------------------------

pub fn expr_strategy() -> impl Strategy<Value = TExpr> {
    prop_oneof![
        (0..6i64).prop_map(TExpr::Const),
        (0..NK).prop_map(TExpr::Var),
        ((0..NK), -2..3i64).prop_map(|(i, c)| TExpr::Add(i, c)),
    ]
}

pub fn cond_strategy() -> impl Strategy<Value = TCond> {
    prop_oneof![
        2 => (expr_strategy(), expr_strategy(), 0..4u8).prop_map(|(l, r, op)| {
            let op = [Cmp::Eq, Cmp::Ne, Cmp::Lt, Cmp::Le][op as usize];
            TCond::Cmp(l, op, r)
        }),
        1 => (0..NU).prop_map(TCond::KnownU),
        1 => Just(TCond::True),
        1 => Just(TCond::False),
    ]
}

pub fn leaf_strategy(markers: bool) -> BoxedStrategy<TStmt> {
    let base = prop_oneof![
        ((0..NK), expr_strategy()).prop_map(|(i, e)| TStmt::AssignK(i, e)),
        ((0..NU), expr_strategy()).prop_map(|(i, e)| TStmt::BindU(i, e)),
        cond_strategy().prop_map(TStmt::Test),
    ];
    if markers {
        prop_oneof![
            3 => base,
            1 => (b'a'..=b'h').prop_map(TStmt::Mark),
        ]
        .boxed()
    } else {
        base.boxed()
    }
}

pub fn stmt_strategy(depth: u32, markers: bool) -> BoxedStrategy<TStmt> {
    if depth == 0 {
        return leaf_strategy(markers);
    }
    let seq = prop::collection::vec(stmt_strategy(depth - 1, markers), 0..3);
    let seq2 = prop::collection::vec(stmt_strategy(depth - 1, markers), 0..3);
    prop_oneof![
        4 => leaf_strategy(markers),
        2 => ((0..NK), 1..4i64, 0..4i64, seq.clone())
            .prop_map(|(v, lo, hi, b)| TStmt::Some(v, lo, hi, b)),
        1 => ((0..NK), 1..3i64, 0..4i64, seq.clone())
            .prop_map(|(v, lo, hi, b)| TStmt::For(v, lo, hi, b)),
        2 => prop::collection::vec(seq.clone(), 2..4).prop_map(TStmt::Either),
        1 => (cond_strategy(), seq.clone(), seq2).prop_map(|(c, t, e)| TStmt::If(c, t, e)),
        1 => seq.clone().prop_map(TStmt::Not),
        1 => seq.prop_map(TStmt::Commit),
    ]
    .boxed()
}

pub fn program_strategy(markers: bool) -> impl Strategy<Value = Vec<TStmt>> {
    prop::collection::vec(stmt_strategy(2, markers), 1..5)
}


pub fn seq_src(stmts: &[TStmt]) -> String {
    let mut s = String::new();
    src_seq(stmts, 2, &mut s);
    // drop the trailing newline so callers can place separators
    s.truncate(s.trim_end_matches('\n').len());
    s
}
