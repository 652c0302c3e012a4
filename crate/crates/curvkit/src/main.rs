fn main() {
    std::process::exit(curvkit::cli::main_entry());
}
