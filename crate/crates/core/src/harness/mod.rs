//! Configuration, batch execution and reporting for benchmark experiments.

pub mod config;
pub mod experiment;
pub mod presets;
pub mod report;

pub use config::{load_config, ExperimentConfig, ObjectiveRef, SweepAxis, SweepParam};
pub use experiment::{
    run_sweep, run_table, success_rate, wilson_interval, CellError, SuccessEstimate, SweepCell,
    SweepMetadata, SweepResult, TableResult,
};
pub use presets::{table, Preset, TableSpec, TABLES};
pub use report::{emit_report, render_report, Report, ReportFormat};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "CBO_THREADS";

/// Runs `f` on a pool sized by `CBO_THREADS` (all cores when unset or
/// invalid).
pub fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}
