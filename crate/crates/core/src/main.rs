fn main() {
    std::process::exit(liebsim::cli::run(std::env::args_os()));
}
