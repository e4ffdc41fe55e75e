fn main() {
    std::process::exit(coldhardiness::cli::run(std::env::args_os()));
}
