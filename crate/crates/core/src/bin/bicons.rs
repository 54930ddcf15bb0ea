fn main() {
    std::process::exit(biconservative::cli::run(std::env::args()));
}
