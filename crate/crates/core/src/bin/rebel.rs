fn main() {
    std::process::exit(rebel::cli::run(std::env::args_os()));
}
