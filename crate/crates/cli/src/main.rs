use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use welfare_moments_cli::{run, write_output, CliError, Command, EXIT_OK};

#[derive(Debug, Parser)]
#[command(
    name = "welfare-moments",
    version,
    about = "Welfare effects of price changes from demand moments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "WM_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let flags = cli.command.flags();
    let cfg = flags.resolve()?;
    let output = run(&cli.command, &cfg)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    match &flags.out {
        Some(dir) => write_output(&output, dir),
        None => {
            let (_, bytes) = &output.files[0];
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => {
            let err = CliError::Config(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
