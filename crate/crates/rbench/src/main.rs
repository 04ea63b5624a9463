use std::io::Write;
use std::path::{Path, PathBuf};
use std::process;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rbench::config::{parse_config, ConfigSources, ExperimentConfig, ModeArg};
use rbench::error::{AppError, Result};
use rbench::report::{
    fit_dataset, read_fit_report, resolve_mode, write_fit_outputs, write_interleaved, write_json, write_sweep,
    write_table, FitReport, InterleavedReport,
};
use rbench::{dataset_io, parallel, sweep, ExitCode};
use rbench_core::clifford::CliffordGroup;
use rbench_core::dynamics::{excitation_fwhm, excitation_profile};
use rbench_core::pulse::{PulseSpec, PulseShape};
use serde::Serialize;

const DEFAULT_OUT: &str = "rbench-out";

/// Single-qubit randomized benchmarking simulator.
///
/// Configuration is resolved from, in increasing precedence: the `--preset`
/// (or the file's `preset` key), the `--config` JSON file, and `--seed` /
/// `--out`. Without a preset the file must set `lengths`,
/// `sequences_per_length` (alias `k`), `shots_per_sequence` (alias `r`) and
/// `pulse`; everything else defaults to ideal noise, perfect SPAM, random
/// targets, seed 0 and a combined-mode fit.
///
/// Exit codes: 0 success, 1 I/O or malformed input, 2 configuration error,
/// 3 fit failure, 4 internal invariant violation.
#[derive(Debug, Parser)]
#[command(name = "rbench", version)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: config `output_dir`, else rbench-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// One of electron-square, electron-sinc, nuclear-square.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads [default: all cores]. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clifford group checks.
    #[command(subcommand)]
    Clifford(CliffordCommand),
    /// Pulse analysis.
    #[command(subcommand)]
    Pulse(PulseCommand),
    /// Benchmarking runs and fits.
    #[command(subcommand)]
    Rb(RbCommand),
    /// Pulse-duration sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
}

#[derive(Debug, Subcommand)]
enum CliffordCommand {
    /// Build the group and check distinctness, closure, inverses and the mean
    /// gate count.
    Verify,
}

#[derive(Debug, Subcommand)]
enum PulseCommand {
    /// Write the π-pulse excitation profile to profile.csv.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
struct ProfileArgs {
    /// square or sinc3 [default: from the config, else square].
    #[arg(long)]
    shape: Option<String>,
    /// π duration in seconds [default: from the config, else 2.08e-6].
    #[arg(long)]
    pi_duration: Option<f64>,
    /// Half-width of the detuning scan in Hz [default: 4/π duration].
    #[arg(long)]
    span: Option<f64>,
    #[arg(long, default_value_t = 401)]
    points: usize,
}

#[derive(Debug, Subcommand)]
enum RbCommand {
    /// Simulate the configured experiment and write dataset.csv + dataset.json.
    Run {
        /// Record the wall-clock time in the sidecar (breaks byte-identical reruns).
        #[arg(long)]
        timestamp: bool,
    },
    /// Fit a dataset and write fit.json and decay tables.
    Fit {
        /// Dataset directory or file [default: the output directory].
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// free, fixed (asymptote estimated from the data), fixed=<v> or
        /// combined [default: config report.fit_mode].
        #[arg(long)]
        mode: Option<ModeArg>,
        /// Residual-bootstrap resamples [default: config report.bootstrap_resamples].
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Interleaved gate fidelities against a reference fit.json.
    Interleaved {
        #[arg(long)]
        reference: PathBuf,
        /// Interleaved dataset directories or files.
        #[arg(long = "dataset", num_args = 0..)]
        datasets: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum SweepCommand {
    /// Run and fit every configured sweep point; writes sweep.csv + sweep.json.
    Run,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match parallel::with_threads(cli.threads, || run(&cli)).and_then(|r| r) {
        Ok(()) => ExitCode::Success,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    process::exit(code as i32);
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    parse_config(&ConfigSources {
        preset: cli.preset.as_deref(),
        file: cli.config.as_deref(),
        seed: cli.seed,
        output_dir: cli.out.as_deref(),
    })
}

fn optional_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    if cli.preset.is_some() || cli.config.is_some() {
        load_config(cli).map(Some)
    } else {
        Ok(None)
    }
}

fn out_dir(cli: &Cli, config: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| config.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Clifford(CliffordCommand::Verify) => clifford_verify(),
        Command::Pulse(PulseCommand::Profile(args)) => pulse_profile(cli, args),
        Command::Rb(RbCommand::Run { timestamp }) => rb_run(cli, *timestamp),
        Command::Rb(RbCommand::Fit { dataset, mode, bootstrap }) => rb_fit(cli, dataset.as_deref(), *mode, *bootstrap),
        Command::Rb(RbCommand::Interleaved { reference, datasets }) => rb_interleaved(cli, reference, datasets),
        Command::Sweep(SweepCommand::Run) => sweep_run(cli),
    }
}

// A closed stdout (e.g. piped into `head`) is not an error.
fn print_line(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json<T: Serialize>(value: &T) {
    print_line(&serde_json::to_string_pretty(value).expect("serialises"));
}

#[derive(Serialize)]
struct VerifySummary {
    elements: usize,
    distinct: bool,
    closed: bool,
    inverses: bool,
    mean_gate_count: f64,
    passed: bool,
}

fn clifford_verify() -> Result<()> {
    let group = CliffordGroup::build()?;
    let check = group.check();
    print_json(&VerifySummary {
        elements: group.elements().len(),
        distinct: check.distinct,
        closed: check.closed,
        inverses: check.inverses,
        mean_gate_count: check.mean_gate_count,
        passed: check.passed(),
    });
    if check.passed() {
        Ok(())
    } else {
        Err(AppError::Invariant("Clifford group checks failed".into()))
    }
}

#[derive(Serialize)]
struct ProfileSummary {
    shape: PulseShape,
    pi_duration: f64,
    fwhm_hz: f64,
    profile: PathBuf,
}

fn pulse_profile(cli: &Cli, args: &ProfileArgs) -> Result<()> {
    let config = optional_config(cli)?;
    let shape = match args.shape.as_deref() {
        None => config.as_ref().map_or(PulseShape::Square, |c| c.pulse.shape),
        Some("square") => PulseShape::Square,
        Some("sinc3") => PulseShape::Sinc3,
        Some(other) => return Err(AppError::Config(format!("unknown pulse shape `{other}` (square, sinc3)"))),
    };
    let pi_duration = args
        .pi_duration
        .or_else(|| config.as_ref().map(|c| c.pulse.pi_duration))
        .unwrap_or(rbench::config::ELECTRON_SQUARE_PI);
    if !(pi_duration > 0.0 && pi_duration.is_finite()) {
        return Err(AppError::Config("--pi-duration must be positive".into()));
    }
    if args.points < 2 {
        return Err(AppError::Config("--points must be at least 2".into()));
    }
    let span = args.span.unwrap_or(4.0 / pi_duration);
    let pulse = PulseSpec::pi_pulse(shape, pi_duration);
    let detunings: Vec<f64> =
        (0..args.points).map(|i| -span + 2.0 * span * i as f64 / (args.points - 1) as f64).collect();
    let profile = excitation_profile(&pulse, &detunings)?;
    let rows: Vec<Vec<String>> =
        detunings.iter().zip(&profile).map(|(d, p)| vec![d.to_string(), p.to_string()]).collect();
    let dir = out_dir(cli, config.as_ref());
    let path = dir.join("profile.csv");
    write_table(&path, &["detuning_hz", "p_up"], &rows)?;
    print_json(&ProfileSummary { shape, pi_duration, fwhm_hz: excitation_fwhm(&pulse)?, profile: path });
    Ok(())
}

fn rb_run(cli: &Cli, timestamp: bool) -> Result<()> {
    let config = load_config(cli)?;
    let dir = out_dir(cli, Some(&config));
    let rb = config.rb_config();
    log::info!("running {} shots", rb.total_shots());
    let dataset = parallel::run_experiment(&rb)?;
    let created = timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    dataset_io::write_dataset(&dir, &dataset, created)?;
    print_line(&dir.display().to_string());
    Ok(())
}

fn rb_fit(cli: &Cli, dataset: Option<&Path>, mode: Option<ModeArg>, bootstrap: Option<usize>) -> Result<()> {
    let config = optional_config(cli)?;
    let dir = out_dir(cli, config.as_ref());
    let source = dataset.map_or_else(|| dir.clone(), Path::to_path_buf);
    let data = dataset_io::read_dataset(&source)?;
    let options = config.as_ref().map(|c| c.report).unwrap_or_default();
    let mode = resolve_mode(&data, mode.unwrap_or_else(|| options.fit_mode.into()))?;
    let (agg, fit) = fit_dataset(&data, mode)?;
    let resamples = bootstrap.unwrap_or(options.bootstrap_resamples);
    let interval =
        if resamples > 0 { Some(parallel::bootstrap_ci(&agg, mode, resamples, data.seed())?) } else { None };
    let report = FitReport::new(&data, &agg, fit, interval);
    write_fit_outputs(&dir, &data, &report, options.per_target)?;
    print_json(&report.fit);
    Ok(())
}

fn rb_interleaved(cli: &Cli, reference: &Path, datasets: &[PathBuf]) -> Result<()> {
    let config = optional_config(cli)?;
    let dir = out_dir(cli, config.as_ref());
    let reference = read_fit_report(reference)?;
    let mut fits = Vec::with_capacity(datasets.len());
    for path in datasets {
        let data = dataset_io::read_dataset(path)?;
        let gate = data
            .config
            .interleaved_gate
            .ok_or_else(|| AppError::dataset(path, "dataset has no interleaved gate"))?;
        let (_, fit) = fit_dataset(&data, reference.fit.mode)?;
        fits.push((gate, fit));
    }
    let report = InterleavedReport::new(reference.fit, &fits)?;
    write_interleaved(&dir, &report)?;
    print_json(&report.rows);
    Ok(())
}

fn sweep_run(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    let dir = out_dir(cli, Some(&config));
    let result = sweep::run_sweep(&config);
    write_sweep(&dir, &result)?;
    write_json(&dir.join("config.json"), &config)?;
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} sweep points failed", result.rows.len());
    }
    print_line(&dir.display().to_string());
    Ok(())
}

