fn main() {
    std::process::exit(arrisk_cli::run(std::env::args().skip(1)));
}
