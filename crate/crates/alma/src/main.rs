fn main() {
    std::process::exit(alma::cli::main_with_args(std::env::args_os()));
}
