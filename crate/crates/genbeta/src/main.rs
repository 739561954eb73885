fn main() {
    std::process::exit(genbeta::cli::run_from_env());
}
