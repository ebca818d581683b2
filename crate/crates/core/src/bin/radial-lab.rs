fn main() {
    std::process::exit(radial_lab::cli::run(std::env::args_os()));
}
