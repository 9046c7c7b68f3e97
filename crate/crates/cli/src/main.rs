fn main() {
    std::process::exit(fairdiff_cli::run(std::env::args().collect()));
}
