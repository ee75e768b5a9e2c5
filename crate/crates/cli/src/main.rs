fn main() {
    std::process::exit(qctree::run(std::env::args_os()));
}
