//! Experiment runner binary; all logic lives in the library's CLI module.

fn main() {
    std::process::exit(dsklink::cli::run());
}
