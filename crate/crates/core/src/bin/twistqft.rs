fn main() {
    std::process::exit(twistqft::cli::cli_main(std::env::args_os()));
}
