fn main() {
    std::process::exit(orthoseries::cli::dispatch(std::env::args_os()));
}
