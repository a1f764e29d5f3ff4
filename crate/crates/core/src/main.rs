fn main() {
    std::process::exit(rcbo::cli::run(std::env::args_os()));
}
