fn main() {
    std::process::exit(demn::cli::main());
}
