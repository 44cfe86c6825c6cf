//! Regenerate every corpus golden file from the current interpreter:
//! `cargo run -p alma --example regen_goldens`. Diff before committing.

use alma::corpus;
use alma0::Limits;

fn main() {
    let limits = Limits { max_steps: 5_000_000_000, ..Limits::default() };
    for case in corpus::read_manifest() {
        let src = std::fs::read_to_string(corpus::source_path(&case.name)).unwrap();
        let (result, out) = alma0::run_source(&src, limits).unwrap();
        assert!(result.succeeded(), "{}: {:?}", case.name, result);
        std::fs::write(corpus::golden_path(&case.name), &out).unwrap();
        println!("{}: {} bytes", case.name, out.len());
    }
}
