fn main() {
    std::process::exit(floquet_lindblad::cli::main_with_args(std::env::args_os()));
}
