use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{info, warn};
use qsource::config::BackendKind;
use qsource::{
    emit_report, load_config, run_experiment, write_timing, ReportFormat, RunError,
    MAX_DENSE_DIM_ENV,
};

/// Run consistency, stationarity and ergodicity tests on a quantum source.
///
/// Exit status is 0 when every selected test passes, 1 when any fails,
/// 2 for config errors and 3 for runtime errors such as resource caps.
#[derive(Debug, Parser)]
#[command(name = "qsource", version)]
struct Args {
    /// Experiment config (TOML, or JSON when the extension is .json).
    #[arg(short, long)]
    config: PathBuf,

    /// Output directory; overrides `output.dir` in the config.
    #[arg(short, long)]
    out: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    n_max: Option<usize>,

    /// `dense` or `transfer`.
    #[arg(long)]
    backend: Option<BackendKind>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,

    /// Repeat for more detail (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qsource: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<bool, RunError> {
    if let Ok(value) = std::env::var(MAX_DENSE_DIM_ENV) {
        let cap = value.trim().parse::<usize>().map_err(|_| {
            RunError::Config(format!(
                "{MAX_DENSE_DIM_ENV}: not a positive integer: {value}"
            ))
        })?;
        qsource_core::operator::set_max_dense_dim(cap);
        info!("dense dimension cap set to {cap}");
    }

    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n_max) = args.n_max {
        config.n_max = n_max;
    }
    if let Some(backend) = args.backend {
        config.backend = backend;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Config(format!("threads: {e}")))?;
    let threads = pool.current_num_threads();
    let report = pool.install(|| run_experiment(&config))?;

    let dir = args
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("qsource-out"));
    std::fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let report_path = dir.join(config.output.report.as_deref().unwrap_or("report.json"));
    emit_report(&report, ReportFormat::Json, &report_path)?;
    if !report.pairs.is_empty() {
        let csv_path = dir.join(config.output.decay_csv.as_deref().unwrap_or("decay.csv"));
        emit_report(&report, ReportFormat::CsvDecay, &csv_path)?;
    }
    write_timing(&report, threads, &dir.join("timing.json"))?;
    info!("report written to {}", report_path.display());

    for f in &report.failures {
        warn!(
            "{} failed on {}: {:?} ({:.3e})",
            f.test, f.subject, f.verdict, f.statistic
        );
    }
    if !report.pass {
        eprintln!(
            "qsource: {} failing result(s); see {}",
            report.failures.len(),
            report_path.display()
        );
    }
    Ok(report.pass)
}
