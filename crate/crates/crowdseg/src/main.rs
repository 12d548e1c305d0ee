fn main() {
    std::process::exit(crowdseg::cli::run());
}
