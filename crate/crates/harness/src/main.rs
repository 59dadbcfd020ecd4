fn main() {
    std::process::exit(localregret_harness::cli::cli(std::env::args_os()));
}
