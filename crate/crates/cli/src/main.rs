use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cbo_core::harness::{
    emit_report, load_config, presets, render_report, run_sweep, run_table, success_rate, table,
    with_worker_pool, ExperimentConfig, Preset, Report, ReportFormat, SweepAxis, SweepParam,
};
use cbo_core::meanfield::{simulate_limit_standard, simulate_limit_truncated, LimitParams};
use cbo_core::{serde_inf, CboError};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Consensus-based optimization experiments.
#[derive(Parser)]
#[command(name = "cbo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TablePreset {
    Table2,
    Table3,
    Table4,
    Table5,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhasePreset {
    Fig1a,
    Fig1b,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Standard,
    Truncated,
}

#[derive(Subcommand)]
enum Command {
    /// Success rate of one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Success rates over the `[[sweep]]` grid of a configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// One benchmark table: every objective over its K, M and N grid.
    Table {
        #[arg(long, value_enum)]
        preset: TablePreset,
        #[arg(long)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Success-rate phase diagram over a sigma by M grid.
    Phase {
        #[arg(long, value_enum)]
        preset: PhasePreset,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated sigma values.
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
        /// Comma-separated M values; `inf` disables truncation.
        #[arg(long, value_delimiter = ',', value_parser = parse_inf)]
        ms: Option<Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo moment trajectory of the mean-field limit, as CSV.
    Meanfield {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Truncation level; required for `--mode truncated`.
        #[arg(long, value_parser = parse_inf)]
        m: Option<f64>,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 2.0)]
        horizon: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_inf(s: &str) -> Result<f64, String> {
    serde_inf::parse_str(s).ok_or_else(|| format!("`{s}` is not a number"))
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

fn write_report<R: Report>(report: &R, output: &Output) -> cbo_core::Result<()> {
    let format = output.format.into();
    match &output.out {
        Some(path) => emit_report(report, format, path),
        None => write_stdout(render_report(report, format)?.as_bytes()),
    }
}

fn write_stdout(bytes: &[u8]) -> cbo_core::Result<()> {
    std::io::stdout()
        .write_all(bytes)
        .map_err(|source| CboError::Io { path: PathBuf::from("<stdout>"), source })
}

fn load(path: &Path, seed: Option<u64>) -> cbo_core::Result<ExperimentConfig> {
    // An unreadable config file is bad input, not a runtime failure.
    let mut config = load_config(path).map_err(|e| match e {
        CboError::Io { .. } => CboError::Config(e.to_string()),
        e => e,
    })?;
    if let Some(seed) = seed {
        config.root_seed = seed;
    }
    Ok(config)
}

fn execute(command: Command) -> cbo_core::Result<()> {
    match command {
        Command::Run { config, seed, output } => {
            let config = load(&config, seed)?;
            write_report(&success_rate(&config)?, &output)
        }
        Command::Sweep { config, seed, output } => {
            let config = load(&config, seed)?;
            write_report(&run_sweep(&config)?, &output)
        }
        Command::Table { preset, reps, seed, output } => {
            let name = match preset {
                TablePreset::Table2 => "table2",
                TablePreset::Table3 => "table3",
                TablePreset::Table4 => "table4",
                TablePreset::Table5 => "table5",
            };
            write_report(&run_table(table(name)?, reps, seed)?, &output)
        }
        Command::Phase { preset, reps, seed, sigmas, ms, output } => {
            let preset = match preset {
                PhasePreset::Fig1a => Preset::Fig1a,
                PhasePreset::Fig1b => Preset::Fig1b,
            };
            let objective = preset.defaults().objective.expect("phase presets name an objective");
            let mut config = ExperimentConfig::from_preset(preset, objective, None)?;
            config.root_seed = seed;
            if let Some(reps) = reps {
                config.repetitions = reps;
            }
            config.sweep = Some(vec![
                SweepAxis {
                    param: SweepParam::Sigma,
                    values: sigmas.unwrap_or_else(|| presets::PHASE_SIGMAS.to_vec()),
                },
                SweepAxis { param: SweepParam::M, values: ms.unwrap_or_else(|| presets::PHASE_MS.to_vec()) },
            ]);
            write_report(&run_sweep(&config)?, &output)
        }
        Command::Meanfield { mode, p, lambda, sigma, m, dim, dt, horizon, samples, record_every, seed, out } => {
            let mut params = LimitParams::new(lambda, sigma, dim, dt, horizon, samples);
            params.record_every = record_every;
            let trajectory = match mode {
                Mode::Standard => simulate_limit_standard(&params, p, seed)?,
                Mode::Truncated => {
                    params.trunc_m = m.ok_or_else(|| CboError::InvalidParameter { name: "M", reason: "required for --mode truncated".into() })?;
                    simulate_limit_truncated(&params, p, seed)?
                }
            };
            let mut csv = Vec::new();
            trajectory.write_csv(&mut csv).expect("writing to memory");
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|source| CboError::Io { path, source }),
                None => write_stdout(&csv),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let result = with_worker_pool(|| execute(cli.command));
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
