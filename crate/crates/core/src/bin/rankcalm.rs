fn main() {
    std::process::exit(rankcalm::cli::run(std::env::args_os()));
}
