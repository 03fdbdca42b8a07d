fn main() {
    std::process::exit(lgpoly::cli::main_with_args(std::env::args_os()));
}
