use clap::Parser;

fn main() -> std::process::ExitCode {
    socmed_cli::run(socmed_cli::Cli::parse())
}
