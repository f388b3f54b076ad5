fn main() {
    std::process::exit(bnsent::cli::run(std::env::args_os()));
}
