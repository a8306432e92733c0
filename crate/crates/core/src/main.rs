fn main() {
    std::process::exit(gcp_denoise::cli::cli_main(std::env::args_os()));
}
