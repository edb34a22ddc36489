fn main() {
    std::process::exit(specter_cli::run_main());
}
