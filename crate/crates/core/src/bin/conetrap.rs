use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conetrap::cli::{emit, load_config, run_command, Command, Format, EXIT_ERROR};

/// Singular exponents of sign-changing permittivities at conical tips.
#[derive(Debug, Parser)]
#[command(name = "conetrap", version)]
struct Args {
    /// Pipeline to run.
    #[arg(value_enum)]
    command: Command,
    /// TOML run description.
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `[output] path`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; defaults to `[output] format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads. CONETRAP_JOBS takes precedence.
    #[arg(long)]
    jobs: Option<usize>,
}

fn jobs(flag: Option<usize>) -> Option<usize> {
    match std::env::var("CONETRAP_JOBS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                log::warn!("ignoring CONETRAP_JOBS={v:?}");
                flag
            }
        },
        Err(_) => flag,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Some(n) = jobs(args.jobs) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let config = match load_config(&args.config, Some(args.command)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("conetrap: [{}] {e}", e.code());
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let format = args.format.unwrap_or(config.output.format);
    let output = run_command(&config);
    if let Some(e) = &output.error {
        eprintln!("conetrap: [{}] {e}", e.code());
    }
    if let Err(e) = emit(&config, &output, args.out.as_deref(), format) {
        eprintln!("conetrap: [{}] {e}", e.code());
        return ExitCode::from(EXIT_ERROR as u8);
    }
    ExitCode::from(output.exit_code as u8)
}
