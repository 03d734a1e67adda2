fn main() {
    std::process::exit(fslsense::cli::run(std::env::args_os()));
}
