fn main() {
    std::process::exit(lexfilt::cli::run(std::env::args_os()));
}
