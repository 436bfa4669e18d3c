use std::process::exit;

fn main() {
    exit(relaytree_cli::run(std::env::args_os()));
}
