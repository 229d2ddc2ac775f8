fn main() {
    std::process::exit(astute::cli::main_with(std::env::args_os()));
}
