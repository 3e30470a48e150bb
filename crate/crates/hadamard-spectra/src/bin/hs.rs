fn main() {
    std::process::exit(hadamard_spectra::cli::run_main());
}
