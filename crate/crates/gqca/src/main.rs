fn main() {
    std::process::exit(gqca::cli::run());
}
