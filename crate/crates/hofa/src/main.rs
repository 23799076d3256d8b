fn main() {
    let code = hofa::cli::run(std::env::args_os().collect(), &|k| std::env::var(k).ok());
    std::process::exit(code);
}
