fn main() {
    std::process::exit(uniqmax::cli::run(std::env::args_os()));
}
