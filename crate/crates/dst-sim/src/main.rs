fn main() {
    std::process::exit(dst_sim::cli::cli_main(std::env::args_os()));
}
