use clap::Parser;
use freqatt_cli::config::Cli;
use freqatt_cli::execute;

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(summary) => {
            if !cli.command.args().quiet {
                println!("{summary}");
            }
            std::process::ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::ExitCode::from(err.exit_code() as u8)
        }
    }
}
