fn main() {
    std::process::exit(nogo_cli::run(std::env::args_os()));
}
