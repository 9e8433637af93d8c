fn main() {
    std::process::exit(torus_ym::cli::run(std::env::args_os()));
}
