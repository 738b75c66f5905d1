fn main() {
    std::process::exit(gsmcrypt::cli::main());
}
