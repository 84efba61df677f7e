fn main() {
    std::process::exit(pluripot::cli::run(std::env::args_os()));
}
