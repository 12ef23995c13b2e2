fn main() {
    std::process::exit(dyntree::harness::cli::run_command(std::env::args_os()));
}
