fn main() {
    std::process::exit(rpcscreen::cli::main_with_args(std::env::args_os()));
}
