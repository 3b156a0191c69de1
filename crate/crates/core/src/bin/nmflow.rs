fn main() {
    std::process::exit(nmflow::cli::main_with_args(std::env::args_os()));
}
