fn main() {
    std::process::exit(qsw::cli::run(std::env::args_os()));
}
