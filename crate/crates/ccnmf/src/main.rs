fn main() {
    std::process::exit(ccnmf::cli::run(std::env::args_os()));
}
