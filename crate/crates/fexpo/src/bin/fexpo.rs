fn main() {
    std::process::exit(fexpo::cli::run(std::env::args()));
}
