fn main() {
    std::process::exit(secalloc::cli::run_from(std::env::args_os()));
}
