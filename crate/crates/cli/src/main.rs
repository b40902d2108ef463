fn main() {
    std::process::exit(dwreg_cli::run(std::env::args_os()));
}
