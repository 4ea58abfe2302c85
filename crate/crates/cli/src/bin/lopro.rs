fn main() {
    std::process::exit(ptm_cli::run_lopro(std::env::args_os()));
}
