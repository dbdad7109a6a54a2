fn main() {
    std::process::exit(cf_fracdiff::cli::run(std::env::args_os()));
}
