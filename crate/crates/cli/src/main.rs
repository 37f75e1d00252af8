fn main() -> std::process::ExitCode {
    cellfree_cli::main_with_args(std::env::args())
}
