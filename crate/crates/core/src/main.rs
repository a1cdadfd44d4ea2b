fn main() {
    std::process::exit(ttsprt::cli::run(std::env::args_os()));
}
