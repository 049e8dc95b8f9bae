fn main() {
    std::process::exit(rideshare::harness::cli::cli_run(std::env::args_os()));
}
