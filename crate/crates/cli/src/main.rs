fn main() {
    std::process::exit(conjchan_cli::main_with_env());
}
