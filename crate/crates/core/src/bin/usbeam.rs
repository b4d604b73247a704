fn main() -> std::process::ExitCode {
    usbeam::cli::main()
}
