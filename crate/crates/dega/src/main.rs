fn main() {
    std::process::exit(dega::cli::run_cli(std::env::args_os()));
}
