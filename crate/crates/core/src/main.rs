fn main() {
    std::process::exit(proxgrad::cli::run_cli(std::env::args_os()));
}
