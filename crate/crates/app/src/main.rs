fn main() -> std::process::ExitCode {
    riddler_app::cli::main()
}
