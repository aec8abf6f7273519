fn main() {
    imbrisk_cli::init_logging();
    std::process::exit(imbrisk_cli::run(std::env::args_os()));
}
