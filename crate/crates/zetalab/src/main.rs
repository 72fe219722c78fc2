fn main() {
    std::process::exit(zetalab::run(std::env::args_os()));
}
