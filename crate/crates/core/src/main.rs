fn main() {
    std::process::exit(partial_haagerup::cli::main_with_args(std::env::args_os()));
}
