fn main() {
    std::process::exit(gdopt::cli::main_with_args(std::env::args_os()));
}
