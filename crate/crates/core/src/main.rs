fn main() {
    std::process::exit(pedfuse::cli::run(std::env::args_os()));
}
