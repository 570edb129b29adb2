fn main() {
    std::process::exit(fdpnet_cli::run(std::env::args_os()));
}
