fn main() {
    std::process::exit(blackwell_cli::main_with_args(std::env::args_os()));
}
