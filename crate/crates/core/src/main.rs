fn main() {
    std::process::exit(wavekin::cli::main_with(std::env::args_os()));
}
