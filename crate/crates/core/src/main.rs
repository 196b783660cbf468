fn main() {
    std::process::exit(metricprof::cli::main_with_args(std::env::args_os()));
}
