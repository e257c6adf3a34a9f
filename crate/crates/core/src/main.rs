fn main() {
    std::process::exit(autostruct::cli::run(std::env::args_os()));
}
