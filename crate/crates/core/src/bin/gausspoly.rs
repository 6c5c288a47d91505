fn main() {
    std::process::exit(gausspoly::cli::run(std::env::args_os()));
}
