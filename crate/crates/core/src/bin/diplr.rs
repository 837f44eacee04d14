fn main() -> std::process::ExitCode {
    diplr::harness::cli::main()
}
