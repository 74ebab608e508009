fn main() {
    std::process::exit(fluidalg::cli::run(std::env::args_os()));
}
