fn main() {
    std::process::exit(scenario_completeness::cli::run(std::env::args_os()));
}
