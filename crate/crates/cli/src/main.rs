fn main() {
    std::process::exit(ptm_cli::run_ptm(std::env::args_os()));
}
