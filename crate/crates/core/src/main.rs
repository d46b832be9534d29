fn main() {
    std::process::exit(qdasim::app::main_with_args(std::env::args_os()));
}
