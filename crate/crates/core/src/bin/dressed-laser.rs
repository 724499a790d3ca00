fn main() {
    std::process::exit(dressed_laser::cli::main_entry());
}
