fn main() {
    std::process::exit(synckit::cli::run(std::env::args_os()));
}
