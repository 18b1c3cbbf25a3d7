fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(csbp_lab::cli::run(&args));
}
