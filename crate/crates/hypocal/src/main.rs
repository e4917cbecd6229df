fn main() {
    std::process::exit(hypocal::run_cli(std::env::args_os()));
}
