fn main() {
    std::process::exit(streampunct::cli::main_from_env());
}
