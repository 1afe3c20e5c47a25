fn main() {
    std::process::exit(confform::cli::run(std::env::args_os()));
}
