fn main() {
    std::process::exit(abwg::cli::run());
}
