mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shotqrng::Error;

#[derive(Parser, Debug)]
#[command(name = "shotqrng", version, about = "Shot-noise QRNG model: distributions, entropy bounds, simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a photon-count pmf on its certified window.
    #[command(allow_negative_numbers = true)]
    Pmf(PmfArgs),
    /// Shannon and min-entropy of the Skellam output, raw and digitized.
    #[command(allow_negative_numbers = true)]
    Entropy(CommonArgs),
    /// Randomness per sample and, with a full detector description, rates.
    #[command(allow_negative_numbers = true)]
    Bounds(CommonArgs),
    /// Parameter sweeps producing plot-ready tables.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Simulate a digitized trace of vacuum homodyne detection.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Test a recorded trace against the Skellam model.
    Certify(CertifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

/// Config layering and flag overrides shared by all subcommands. Flag names
/// mirror the config keys.
#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Named hardware preset (see presets/presets.toml).
    #[arg(long)]
    preset: Option<String>,
    /// TOML config file, layered over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-detector mean photon number; overrides the detector-derived value.
    #[arg(long = "mu", alias = "mean-photons-mu")]
    mu: Option<f64>,
    #[arg(long)]
    phase_phi: Option<f64>,
    #[arg(long)]
    response_time_tau: Option<f64>,
    #[arg(long)]
    max_frequency_nu_m: Option<f64>,
    #[arg(long)]
    power_p: Option<f64>,
    #[arg(long)]
    center_frequency_nu: Option<f64>,
    #[arg(long)]
    sampling_frequency_f: Option<f64>,
    #[arg(long)]
    interval_a: Option<f64>,
    #[arg(long)]
    gain_k: Option<f64>,
    #[arg(long)]
    bit_depth: Option<u32>,
    #[arg(long)]
    offset: Option<f64>,
    /// Shorthand for `--interval-a <R> --gain-k 1`.
    #[arg(long, conflicts_with_all = ["interval_a", "gain_k"])]
    a_over_k: Option<f64>,
    #[arg(long)]
    window_epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PmfKind {
    Skellam,
    Poisson,
    General,
}

#[derive(Args, Debug)]
struct PmfArgs {
    #[arg(long, value_enum, default_value = "skellam")]
    kind: PmfKind,
    /// First arm mean for `--kind general`.
    #[arg(long)]
    mu1: Option<f64>,
    /// Second arm mean for `--kind general`.
    #[arg(long)]
    mu2: Option<f64>,
    /// Pass the pmf through the configured ADC.
    #[arg(long)]
    quantized: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Figure {
    /// Skellam pmf against the normal density of equal variance.
    #[value(name = "2")]
    SkellamVsGaussian,
    /// Randomness per sample over a log grid of mu.
    #[value(name = "3")]
    RandomnessVsMu,
    /// Lower bound over mu for several ADC resolutions.
    #[value(name = "4")]
    ResolutionFamily,
    /// Lower-bound rate over the detector response time.
    #[value(name = "rate")]
    RateVsTau,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    figure: Figure,
    #[arg(long, default_value_t = 0.1)]
    mu_min: f64,
    #[arg(long, default_value_t = 1e3)]
    mu_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// ADC resolutions a/k for figures 4 and rate.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 4.0, 8.0])]
    resolutions: Vec<f64>,
    #[arg(long, default_value_t = 1e-19)]
    tau_min: f64,
    #[arg(long, default_value_t = 1e-12)]
    tau_max: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TraceFormat {
    Binary,
    Csv,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, short = 'n', default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace layout; inferred from a `.csv` output extension when omitted.
    #[arg(long, value_enum)]
    trace_format: Option<TraceFormat>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Trace file (binary or CSV, detected from the content).
    input: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    p_threshold: f64,
    #[arg(long, default_value_t = 1000)]
    min_samples: usize,
    #[arg(long)]
    miller_madow: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Estimation(_) => 1,
        Error::Config(_) => 2,
        Error::Io(_) | Error::Format(_) => 3,
    }
}

fn report(kind: &str, msg: &str) {
    let msg = msg.trim().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
    eprintln!("error kind={kind} msg=\"{msg}\"");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            report("config", text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.kind(), &e.to_string());
            ExitCode::from(exit_code(&e))
        }
    }
}
