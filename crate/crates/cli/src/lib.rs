//! Config-driven experiment runner built on `qcompress`.

pub mod config;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod manifest;

use std::path::PathBuf;
use std::time::Instant;

use config::ExperimentConfig;
use error::CliError;
use manifest::{write_outputs, Manifest};

/// Runs an experiment and writes its outputs; returns the manifest path.
pub fn run(config: &ExperimentConfig, threads: usize) -> Result<PathBuf, CliError> {
    let diagnostics = config.check();
    if !diagnostics.is_empty() {
        return Err(CliError::Config(diagnostics));
    }
    let est = estimate::estimate(config);
    if est.exceeds(config.max_memory_gb) {
        return Err(CliError::Resource(format!(
            "{} needs about {:.2} GiB, cap is {} GiB",
            config.experiment.name(),
            est.peak_memory_bytes as f64 / (1u64 << 30) as f64,
            config.max_memory_gb
        )));
    }
    let start = Instant::now();
    let out = experiments::execute(config)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: config.experiment.name().to_string(),
        seed: config.seed,
        config: serde_json::to_value(config).expect("config serializes"),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads,
        files: Vec::new(),
        summary: serde_json::Value::Object(out.summary),
    };
    write_outputs(&config.output_dir, &out.files, manifest)
}
