use std::process::exit;

fn main() {
    exit(topovec::cli::run());
}
