fn main() {
    std::process::exit(decision_forecast::cli::run());
}
