fn main() {
    std::process::exit(argmaxlab::cli::main_with_args(std::env::args_os()));
}
