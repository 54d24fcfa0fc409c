fn main() {
    std::process::exit(hsos::cli::main_with_args(std::env::args_os()));
}
