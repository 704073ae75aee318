fn main() {
    std::process::exit(projdiv::cli::main_with_args(std::env::args_os()));
}
