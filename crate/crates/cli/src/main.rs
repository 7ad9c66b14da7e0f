fn main() {
    std::process::exit(egl_cli::main_with_args(std::env::args_os()));
}
