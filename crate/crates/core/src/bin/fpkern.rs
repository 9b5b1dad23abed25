fn main() {
    std::process::exit(fpkern::cli::main_with_args(std::env::args_os()));
}
