fn main() {
    std::process::exit(weylcert_cli::run(std::env::args_os()));
}
