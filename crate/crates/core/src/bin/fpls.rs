fn main() -> std::process::ExitCode {
    fpls::cli::main()
}
