fn main() {
    std::process::exit(hh_cli::run(std::env::args_os()));
}
