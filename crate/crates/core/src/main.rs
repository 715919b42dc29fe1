fn main() {
    std::process::exit(zenolab::cli::run(std::env::args_os()));
}
