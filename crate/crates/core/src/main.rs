use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rotstar::cli::{load_config, run, CliError};

/// Rotating barotropic star equilibria.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let (cfg, raw) = load_config(&args.config)?;
    if let Some(n) = args.jobs {
        if n == 0 {
            return Err(CliError::Config {
                field: "--jobs".into(),
                reason: "must be positive".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config {
                field: "--jobs".into(),
                reason: e.to_string(),
            })?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let manifest = run(&cfg, &raw, &out)?;
    eprintln!(
        "{} files written to {}",
        manifest.files.len() + 1,
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
