fn main() {
    std::process::exit(curve_crossing::cli::main_with_args(std::env::args_os()));
}
