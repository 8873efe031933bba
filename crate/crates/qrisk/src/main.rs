fn main() {
    std::process::exit(qrisk::cli::run(std::env::args()));
}
