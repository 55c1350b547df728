fn main() {
    std::process::exit(liouville_cli::run_cli(std::env::args_os()));
}
