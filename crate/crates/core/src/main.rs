fn main() {
    std::process::exit(ideal_elim::cli::main_with_args(std::env::args_os()));
}
