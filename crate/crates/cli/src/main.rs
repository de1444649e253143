fn main() {
    std::process::exit(osc_time_cli::run(std::env::args_os()));
}
