fn main() {
    std::process::exit(infection_risk::cli::run_cli(std::env::args_os()));
}
