fn main() {
    std::process::exit(lhv::cli::run(std::env::args_os()));
}
