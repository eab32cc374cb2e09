fn main() {
    std::process::exit(depthbandit::cli::run_from_args(std::env::args_os()));
}
