fn main() {
    std::process::exit(liouville_q::cli::main_with_args(std::env::args_os()));
}
