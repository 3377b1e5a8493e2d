fn main() {
    std::process::exit(bipolkit::cli::run_from(std::env::args_os()));
}
