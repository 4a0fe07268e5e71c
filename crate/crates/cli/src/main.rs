fn main() {
    std::process::exit(arveson_cli::main_with_args(std::env::args_os()));
}
