fn main() {
    let mut stderr = std::io::stderr();
    if let Err(e) = mcdiff::cli::init_workers() {
        eprintln!("mcdiff: {e}");
        std::process::exit(1);
    }
    std::process::exit(mcdiff::cli::run(std::env::args_os(), &mut stderr));
}
