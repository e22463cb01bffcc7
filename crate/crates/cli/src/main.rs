fn main() {
    std::process::exit(projmetric_cli::run(std::env::args_os()));
}
