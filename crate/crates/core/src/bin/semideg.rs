fn main() {
    std::process::exit(semideg::cli::run(std::env::args_os()));
}
