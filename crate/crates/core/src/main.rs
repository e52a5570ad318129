fn main() {
    std::process::exit(molrbf::cli::run(std::env::args_os()));
}
