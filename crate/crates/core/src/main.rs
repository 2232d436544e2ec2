fn main() {
    std::process::exit(netheat::cli::run(std::env::args_os()));
}
