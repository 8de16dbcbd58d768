fn main() {
    std::process::exit(dualfair_cli::run(std::env::args_os()));
}
