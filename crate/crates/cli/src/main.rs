fn main() {
    std::process::exit(misig_cli::app::run(std::env::args_os()));
}
