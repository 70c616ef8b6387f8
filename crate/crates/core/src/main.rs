fn main() {
    std::process::exit(vortexlab::harness::cli::main_with_args(std::env::args_os()));
}
