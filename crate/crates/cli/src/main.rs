use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qcompress_cli::config::{load_config, Experiment};
use qcompress_cli::error::{CliError, EXIT_CONFIG};
use qcompress_cli::estimate::estimate;
use qcompress_cli::manifest::validate_manifest;

#[derive(Parser)]
#[command(name = "qcompress", version, about = "Run compressibility experiments on quantum dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment; prints the manifest path on success.
    Run(ConfigArgs),
    /// Check a config, or a written manifest against its files.
    Validate(ValidateArgs),
    /// Print peak memory and operation counts for a config.
    Estimate(ConfigArgs),
    /// List experiment names.
    ListExperiments,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Override the seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    #[arg(long, value_name = "INT")]
    threads: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ValidateArgs {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

fn load(args: &ConfigArgs) -> Result<qcompress_cli::config::ExperimentConfig, CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(dir) = &args.output {
        config.output_dir = dir.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let threads = args
                .threads
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
                .max(1);
            qcompress::set_threads(threads);
            let config = load(&args)?;
            let path = qcompress_cli::run(&config, threads)?;
            println!("{}", path.display());
        }
        Command::Validate(args) => {
            if let Some(path) = args.config {
                load_config(&path)?;
                eprintln!("{}: ok", path.display());
            }
            if let Some(path) = args.manifest {
                let m = validate_manifest(&path)?;
                eprintln!("{}: ok ({} files)", path.display(), m.files.len());
            }
        }
        Command::Estimate(args) => {
            let config = load(&args)?;
            let est = estimate(&config);
            for w in &est.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", serde_json::to_string_pretty(&est).expect("estimate serializes"));
        }
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<14} {}", e.name(), e.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
