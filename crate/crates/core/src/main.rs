use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gmcap::cli::{self, Command, Invocation, RunConfig};

/// Classical capacity of Gaussian quantum measurement channels.
#[derive(Debug, Parser)]
#[command(name = "gmcap", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    #[arg(long, value_enum)]
    command: Command,

    /// Fail with exit code 4 when the threshold condition does not hold.
    #[arg(long)]
    strict: bool,

    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut stderr = io::stderr();
    let config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return ExitCode::from(cli::exit_code(&e) as u8);
        }
    };
    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot create {}: {e}", path.display());
                return ExitCode::from(cli::EXIT_INVALID as u8);
            }
        },
        None => Box::new(io::stdout().lock()),
    };
    let inv = Invocation {
        command: args.command,
        config,
        strict: args.strict,
        seed: args.seed,
    };
    let code = cli::run_command(&inv, &mut out, &mut stderr);
    ExitCode::from(code as u8)
}
