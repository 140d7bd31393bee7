fn main() {
    std::process::exit(rotforge::cli::run_from_args(std::env::args_os()));
}
