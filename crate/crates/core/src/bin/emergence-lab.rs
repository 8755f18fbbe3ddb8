fn main() {
    std::process::exit(emergence_lab::cli::run(std::env::args_os()));
}
