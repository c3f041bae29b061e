fn main() {
    std::process::exit(hlayers::cli::run(std::env::args_os()));
}
