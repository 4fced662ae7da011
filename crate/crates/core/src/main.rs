fn main() {
    std::process::exit(ddelay::cli::run(std::env::args_os()));
}
