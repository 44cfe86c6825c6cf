//! Built-in procedures: WRITE/WRITELN value formatting, the corpus printers
//! `Print` and `PrintSolution`, and `Initialize`, which loads a fixed small
//! timetabling instance. Builtin names cannot be redeclared by programs.

use alloc::format;
use alloc::string::String;

use crate::program::{ArrayTy, BuiltinProc, Category, EnumType};
use crate::store::{CellState, Value};

pub fn builtin(name: &str) -> Option<BuiltinProc> {
    match name {
        "Print" => Some(BuiltinProc::Print),
        "PrintSolution" => Some(BuiltinProc::PrintSolution),
        "Initialize" => Some(BuiltinProc::Initialize),
        _ => None,
    }
}

pub fn is_builtin_name(name: &str) -> bool {
    builtin(name).is_some()
}

/// The instance `Initialize` loads: 3 courses, 2 periods, 2 rooms, one
/// lecture per course, and a single conflict between courses 1 and 2.
pub const INSTANCE_COURSES: i64 = 3;
pub const INSTANCE_PERIODS: i64 = 2;
pub const INSTANCE_REQUIREMENTS: [i64; 3] = [1, 1, 1];
pub const INSTANCE_CONFLICTS: [(i64, i64); 1] = [(1, 2)];

/// Availability of course `c` at period `p` (1-based).
pub fn instance_available(_c: i64, _p: i64) -> bool {
    true
}

/// Shape check for the four `Initialize` arguments, run at resolve time.
pub fn check_initialize_shapes(tys: &[ArrayTy]) -> Result<(), String> {
    let q = INSTANCE_COURSES;
    let p = INSTANCE_PERIODS;
    let want = [
        (alloc::vec![(1, q), (1, p)], Category::Bool, "availability"),
        (alloc::vec![(1, q), (1, q)], Category::Bool, "conflict"),
        (alloc::vec![(1, q)], Category::Int, "requirements"),
        (alloc::vec![(1, q), (1, p)], Category::Bool, "timetable"),
    ];
    for (ty, (dims, cat, what)) in tys.iter().zip(want.iter()) {
        if ty.dims != *dims || ty.elem.category() != *cat {
            return Err(format!(
                "Initialize {} argument must have index ranges {:?}",
                what, dims
            ));
        }
    }
    Ok(())
}

/// Normative WRITE formats: minimal decimal integers, TRUE/FALSE booleans,
/// enum values print their identifier.
pub fn format_value(v: Value, enums: &[EnumType], out: &mut String) {
    match v {
        Value::Int(i) => {
            let _ = core::fmt::Write::write_fmt(out, format_args!("{}", i));
        }
        Value::Bool(true) => out.push_str("TRUE"),
        Value::Bool(false) => out.push_str("FALSE"),
        Value::Enum(ty, ord) => out.push_str(&enums[ty as usize].variants[ord as usize]),
    }
}

/// Cell rendering for `Print`: `.` marks an Unknown cell.
pub fn format_cell(state: CellState, enums: &[EnumType], out: &mut String) {
    match state {
        CellState::Unknown => out.push('.'),
        CellState::Known(v) => format_value(v, enums, out),
    }
}

/// Cell rendering for `PrintSolution`: booleans as 1/0.
pub fn format_cell_binary(state: CellState, out: &mut String) {
    match state {
        CellState::Unknown => out.push('.'),
        CellState::Known(Value::Bool(true)) => out.push('1'),
        CellState::Known(Value::Bool(false)) => out.push('0'),
        CellState::Known(v) => {
            let _ = core::fmt::Write::write_fmt(out, format_args!("{:?}", v));
        }
    }
}

/// Join formatted cells with single spaces, one dimension per output line.
pub fn format_row(
    states: impl Iterator<Item = CellState>,
    enums: &[EnumType],
    out: &mut String,
) {
    let mut first = true;
    for state in states {
        if !first {
            out.push(' ');
        }
        first = false;
        format_cell(state, enums, out);
    }
    out.push('\n');
}
