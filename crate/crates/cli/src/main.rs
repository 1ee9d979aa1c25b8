fn main() {
    std::process::exit(maurey_cli::run_from_args(std::env::args_os()));
}
