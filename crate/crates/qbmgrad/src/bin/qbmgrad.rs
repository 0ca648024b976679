fn main() {
    std::process::exit(qbmgrad::cli::main_with_args(std::env::args_os()));
}
