fn main() {
    std::process::exit(citesir::cli::main_with_args(std::env::args_os()));
}
