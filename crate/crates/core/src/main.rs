fn main() {
    std::process::exit(graphsight::cli::run(std::env::args_os()));
}
