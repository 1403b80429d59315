fn main() {
    std::process::exit(bridge_inspect::cli::main_with_args(std::env::args_os()));
}
