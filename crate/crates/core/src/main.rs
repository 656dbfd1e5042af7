fn main() {
    std::process::exit(eikograph::cli::run(std::env::args_os()));
}
