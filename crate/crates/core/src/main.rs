fn main() {
    std::process::exit(vortexspec::cli::run());
}
