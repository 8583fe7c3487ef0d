//! Experiment orchestration and the verification suite for `rfim-core`.

pub mod checks;
pub mod config;
pub mod scaling;
pub mod seeds;

use std::path::PathBuf;

use serde::Serialize;

pub const TOOL_VERSION: &str = concat!("rfim-harness ", env!("CARGO_PKG_VERSION"));

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "RFIM_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] rfim_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Output(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Header lines shared by every output file: version, config, master seed.
pub fn header_lines<C: Serialize>(config: &C, master_seed: u64) -> Result<Vec<String>, HarnessError> {
    let json = serde_json::to_string(config).map_err(|e| HarnessError::Output(e.to_string()))?;
    Ok(vec![
        format!("tool: {TOOL_VERSION}"),
        format!("config: {json}"),
        format!("master_seed: {master_seed}"),
    ])
}

/// Worker count from `RFIM_WORKERS`, else the available parallelism.
pub fn worker_count() -> Result<usize, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs `f` on a pool sized by [`worker_count`].
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(pool.install(f))
}
