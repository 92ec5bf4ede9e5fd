fn main() {
    std::process::exit(lll_gp::cli::main_with_args(std::env::args_os()));
}
