fn main() {
    let code = bell_lab_cli::main_with_args(std::env::args_os().collect());
    std::process::exit(code);
}
