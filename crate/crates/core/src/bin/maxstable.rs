fn main() {
    std::process::exit(maxstable::cli::main());
}
