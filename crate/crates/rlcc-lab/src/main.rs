fn main() {
    std::process::exit(rlcc_lab::cli::cli_main(std::env::args()));
}
