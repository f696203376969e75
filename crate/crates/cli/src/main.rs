fn main() {
    std::process::exit(cvpqc_cli::run(std::env::args_os()));
}
