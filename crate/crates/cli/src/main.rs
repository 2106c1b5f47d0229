fn main() {
    std::process::exit(chiplet_dse_cli::run(std::env::args_os()));
}
