fn main() {
    std::process::exit(cts::cli::run(std::env::args_os()));
}
