fn main() {
    std::process::exit(quantromon::cli::run(std::env::args_os()));
}
