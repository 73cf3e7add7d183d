fn main() {
    std::process::exit(qwiretap_cli::run(std::env::args_os()));
}
