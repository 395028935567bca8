fn main() {
    std::process::exit(kbavg_cli::main_with_args(std::env::args_os()));
}
