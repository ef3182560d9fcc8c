fn main() {
    std::process::exit(spectral_sandwich::cli::run(std::env::args_os()));
}
