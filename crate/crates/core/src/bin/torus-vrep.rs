fn main() {
    std::process::exit(torus_vrep::cli::main_with_args(std::env::args_os()));
}
