fn main() {
    std::process::exit(hydap::cli::run(std::env::args_os()));
}
