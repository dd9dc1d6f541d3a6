fn main() {
    std::process::exit(toposig::cli::run_cli(std::env::args_os()));
}
