fn main() -> std::process::ExitCode {
    scaledrive_cli::main_with_args(std::env::args_os())
}
