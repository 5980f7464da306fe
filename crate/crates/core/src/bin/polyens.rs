fn main() {
    std::process::exit(polyens::cli::main_with_args(std::env::args_os()));
}
