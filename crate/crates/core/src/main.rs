fn main() -> std::process::ExitCode {
    printchan::cli::main_with_args(std::env::args_os())
}
