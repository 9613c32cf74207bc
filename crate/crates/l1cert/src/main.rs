fn main() {
    std::process::exit(l1cert::run(std::env::args_os()));
}
