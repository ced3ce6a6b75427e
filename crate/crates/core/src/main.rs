fn main() {
    std::process::exit(effect_design::cli::main_with_std());
}
