//! `alma run` and `alma dump-ast`.
//!
//! Exit codes: 0 the computation succeeded, 1 it failed (exhausted without
//! success), 2 runtime error, 3 parse/resolve error, 4 usage error.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write as _};
use std::path::PathBuf;

use clap::Parser;

use alma0::engine::{self, Limits, RunResult};

#[derive(Parser, Debug)]
#[command(name = "alma", about = "Alma-0 interpreter", disable_help_subcommand = true)]
enum Cli {
    /// Parse, resolve and execute a program.
    Run {
        /// Source file (.a0)
        source: PathBuf,
        /// Write one EVENT line per engine event to stderr
        #[arg(long)]
        trace: bool,
        /// Abort with a runtime error after this many statement executions
        #[arg(long, value_name = "N", default_value_t = Limits::default().max_steps)]
        max_steps: u64,
        /// Abort with a runtime error when this many choice points are live
        #[arg(long, value_name = "N", default_value_t = Limits::default().max_choicepoints)]
        max_choicepoints: usize,
        /// Print the parse tree instead of running (same as dump-ast)
        #[arg(long)]
        dump_ast: bool,
    },
    /// Parse a program and print its tree, one node per line.
    DumpAst {
        /// Source file (.a0)
        source: PathBuf,
    },
}

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_COMPILE: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Adapts an `io::Write` to the `fmt::Write` sink the engine expects.
struct IoSink<W: io::Write>(W);

impl<W: io::Write> fmt::Write for IoSink<W> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.0.write_all(s.as_bytes()).map_err(|_| fmt::Error)
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_SUCCESS,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli {
        Cli::Run { source, trace, max_steps, max_choicepoints, dump_ast } => {
            if dump_ast {
                return dump(&source);
            }
            run(&source, trace, max_steps, max_choicepoints)
        }
        Cli::DumpAst { source } => dump(&source),
    }
}

fn read_source(path: &PathBuf) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {}", path.display(), e);
        EXIT_USAGE
    })
}

fn run(path: &PathBuf, trace: bool, max_steps: u64, max_choicepoints: usize) -> i32 {
    let source = match read_source(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let prog = match alma0::compile(&source) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}:{}", path.display(), e);
            return EXIT_COMPILE;
        }
    };
    let limits = Limits { max_steps, max_choicepoints, ..Limits::default() };
    let mut out = IoSink(io::BufWriter::new(io::stdout().lock()));
    let result = if trace {
        let mut diag = IoSink(io::stderr().lock());
        engine::run_traced(&prog, limits, &mut out, &mut diag)
    } else {
        engine::run(&prog, limits, &mut out)
    };
    let _ = out.0.flush();
    match result {
        RunResult::Succeeded => EXIT_SUCCESS,
        RunResult::Failed => EXIT_FAILED,
        RunResult::Error(e) => {
            eprintln!("runtime error: {}:{}", path.display(), e);
            EXIT_RUNTIME
        }
    }
}

fn dump(path: &PathBuf) -> i32 {
    let source = match read_source(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match alma0::parse_source(&source) {
        Ok(module) => {
            print!("{}", module.dump());
            EXIT_SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}:{}", path.display(), e);
            EXIT_COMPILE
        }
    }
}
