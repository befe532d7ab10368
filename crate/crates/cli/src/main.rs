fn main() {
    std::process::exit(ipl_cli::main_with_args(std::env::args_os()));
}
