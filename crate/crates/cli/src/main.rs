fn main() {
    std::process::exit(mtcircle_cli::run(std::env::args_os()));
}
