fn main() {
    std::process::exit(corrflow::cli::run(std::env::args_os()));
}
