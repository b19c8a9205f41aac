//! Command-line entry point; see [`robust_lr::cli`].

use clap::Parser;

fn main() {
    let args = robust_lr::cli::Args::parse();
    std::process::exit(robust_lr::cli::main_with(&args));
}
