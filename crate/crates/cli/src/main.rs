fn main() {
    std::process::exit(hpa_cli::run(std::env::args_os()));
}
