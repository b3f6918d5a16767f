fn main() -> std::process::ExitCode {
    mpdhp::cli::main()
}
