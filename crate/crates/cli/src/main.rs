fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(hybrid_arm_cli::execute(&argv));
}
