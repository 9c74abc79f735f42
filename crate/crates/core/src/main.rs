fn main() {
    std::process::exit(cqed_blockade::cli::run_cli(std::env::args_os()));
}
