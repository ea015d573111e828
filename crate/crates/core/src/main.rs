fn main() -> std::process::ExitCode {
    securesum::harness::cli::main()
}
