fn main() {
    std::process::exit(fiberaudit_cli::run(std::env::args_os()));
}
