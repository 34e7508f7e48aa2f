fn main() {
    std::process::exit(signgraph_cli::run(std::env::args_os()));
}
