fn main() {
    std::process::exit(wsaw::cli::main_with_args(std::env::args_os()));
}
