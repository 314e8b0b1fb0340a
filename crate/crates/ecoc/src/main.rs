fn main() {
    std::process::exit(ecoc::cli::run_from_args());
}
