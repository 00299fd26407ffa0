fn main() -> std::process::ExitCode {
    teaser_service::cli::main_with(std::env::args_os())
}
