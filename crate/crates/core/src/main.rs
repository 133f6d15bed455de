fn main() { std::process::exit(gan_attractor::cli::run_cli(std::env::args_os())); }
