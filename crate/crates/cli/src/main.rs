use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use jcir_cli::{parse_config, run, CliError};

/// Jump-diffusion CIR toolkit: characteristic functions, sampling,
/// transition densities and ergodicity diagnostics.
#[derive(Debug, Parser)]
#[command(name = "jcir", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides `output` in the configuration. Without
    /// either, CSV goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Master seed; overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo work (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: Args) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(output) = args.output {
        cfg.output = Some(output);
    }
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::invalid("flags", "threads", "must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let csv = run(&cfg)?.render(&cfg);
    match &cfg.output {
        Some(path) => std::fs::write(path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jcir: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
