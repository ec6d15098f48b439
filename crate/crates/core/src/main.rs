fn main() {
    std::process::exit(obliplot::cli::run(std::env::args_os()));
}
