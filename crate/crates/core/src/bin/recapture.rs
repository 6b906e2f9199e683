fn main() {
    std::process::exit(recapture_hmm::cli::main_with_args(std::env::args_os()));
}
