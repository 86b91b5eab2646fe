fn main() {
    std::process::exit(llp_forge::cli::run(std::env::args_os()));
}
