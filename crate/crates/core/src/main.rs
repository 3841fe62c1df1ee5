fn main() {
    std::process::exit(ebhotelling::cli::run_from_args(std::env::args_os()));
}
