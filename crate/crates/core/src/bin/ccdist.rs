fn main() {
    std::process::exit(ccdist::cli::main_with_args(std::env::args_os()));
}
