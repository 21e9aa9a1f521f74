fn main() {
    std::process::exit(dstek::cli::run(std::env::args_os()));
}
