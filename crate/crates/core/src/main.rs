fn main() {
    std::process::exit(qfzeta::cli::run(std::env::args_os()));
}
