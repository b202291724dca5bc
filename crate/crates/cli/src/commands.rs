use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use shotqrng::bounds::{
    log_grid, lower_bound_sweep, per_sample_sweep, rate_vs_response_time, RandomnessReport, REPORT_CSV_HEADER,
};
use shotqrng::config::{preset, AdcConfig, RunConfig};
use shotqrng::dist::{gaussian_comparison, general_skellam_pmf, poisson_pmf, skellam_pmf, LoParams};
use shotqrng::entropy::{min_entropy, quantize, shannon_entropy, AdcParams};
use shotqrng::sim::{certify, simulate_trace, CertifyOptions, RawTrace, TRACE_MAGIC};
use shotqrng::{Error, Result};

use crate::{CertifyArgs, Command, CommonArgs, Figure, OutputFormat, PmfArgs, PmfKind, SimulateArgs, SweepArgs, TraceFormat};

/// Defaults for the rate sweep when the config names no laser: 1 mW at 1550 nm.
const DEFAULT_POWER_W: f64 = 1e-3;
const DEFAULT_FREQUENCY_HZ: f64 = 299_792_458.0 / 1550e-9;

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Pmf(args) => pmf(args),
        Command::Entropy(args) => entropy(args),
        Command::Bounds(args) => bounds(args),
        Command::Sweep(args) => sweep(args),
        Command::Simulate(args) => simulate(args),
        Command::Certify(args) => certify_trace(args),
    }
}

fn resolve(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.preset {
        Some(name) => preset(name)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &args.config {
        cfg = RunConfig::from_file(path)
            .map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
                other => other,
            })?
            .over(cfg);
    }

    let det_flags = [
        args.response_time_tau,
        args.max_frequency_nu_m,
        args.power_p,
        args.center_frequency_nu,
        args.sampling_frequency_f,
    ];
    if det_flags.iter().any(Option::is_some) {
        let mut det = cfg.detector.unwrap_or_default();
        det.response_time_tau = args.response_time_tau.or(det.response_time_tau);
        det.max_frequency_nu_m = args.max_frequency_nu_m.or(det.max_frequency_nu_m);
        det.power_p = args.power_p.or(det.power_p);
        det.center_frequency_nu = args.center_frequency_nu.or(det.center_frequency_nu);
        det.sampling_frequency_f = args.sampling_frequency_f.or(det.sampling_frequency_f);
        cfg.detector = Some(det);
    }

    if let Some(mu) = args.mu {
        let phase = args.phase_phi.or(cfg.lo.map(|lo| lo.phase_phi)).unwrap_or(0.0);
        cfg.lo = Some(LoParams::new(mu, phase)?);
    }

    let adc_flags = args.interval_a.is_some()
        || args.gain_k.is_some()
        || args.bit_depth.is_some()
        || args.offset.is_some()
        || args.a_over_k.is_some();
    if adc_flags {
        let mut adc = cfg.adc.unwrap_or(AdcConfig {
            interval_a: 1.0,
            gain_k: 1.0,
            bit_depth: 16,
            input_range: None,
            offset: 0.0,
        });
        if let Some(r) = args.a_over_k {
            adc.interval_a = r;
            adc.gain_k = 1.0;
            adc.input_range = None;
        }
        adc.interval_a = args.interval_a.unwrap_or(adc.interval_a);
        adc.gain_k = args.gain_k.unwrap_or(adc.gain_k);
        adc.bit_depth = args.bit_depth.unwrap_or(adc.bit_depth);
        adc.offset = args.offset.unwrap_or(adc.offset);
        cfg.adc = Some(adc);
    }

    if let Some(eps) = args.window_epsilon {
        let mut numerics = cfg.numerics.unwrap_or_default();
        numerics.window_epsilon = Some(eps);
        cfg.numerics = Some(numerics);
    }
    Ok(cfg)
}

fn adc_of(cfg: &RunConfig) -> Result<AdcParams> {
    match cfg.adc_params()? {
        Some(adc) => Ok(adc),
        None => AdcParams::with_resolution(1.0),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_rows<T: Serialize>(rows: &[T], path: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(open_output(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn emit<T: Serialize>(rows: &[T], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    match format {
        OutputFormat::Csv => write_rows(rows, path),
        OutputFormat::Json => write_json(rows, path),
    }
}

fn write_reports(reports: &[RandomnessReport], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(reports, path),
        OutputFormat::Csv => {
            let mut out = open_output(path)?;
            writeln!(out, "{REPORT_CSV_HEADER}")?;
            for r in reports {
                writeln!(out, "{}", r.csv_row())?;
            }
            out.flush()?;
            Ok(())
        }
    }
}

fn pmf(args: PmfArgs) -> Result<()> {
    let cfg = resolve(&args.common)?;
    let eps = cfg.window_epsilon();
    let mut p = match args.kind {
        PmfKind::Skellam => skellam_pmf(cfg.mean_photons_mu()?, eps)?,
        PmfKind::Poisson => poisson_pmf(cfg.mean_photons_mu()?, eps)?,
        PmfKind::General => {
            let mu1 = args.mu1.ok_or_else(|| Error::Config("--kind general needs --mu1".into()))?;
            let mu2 = args.mu2.ok_or_else(|| Error::Config("--kind general needs --mu2".into()))?;
            general_skellam_pmf(mu1, mu2, eps)?
        }
    };
    if args.quantized {
        p = quantize(&p, &adc_of(&cfg)?)?;
    }
    let path = args.common.output.as_deref();
    match args.common.format {
        OutputFormat::Csv => p.write_csv(open_output(path)?),
        OutputFormat::Json => write_json(&p.to_record(), path),
    }
}

#[derive(Serialize)]
struct EntropyRow {
    mu: f64,
    shannon_bits: f64,
    truncation_bound_bits: f64,
    min_entropy_bits: f64,
    a_over_k: f64,
    quantized_shannon_bits: f64,
    quantized_min_entropy_bits: f64,
}

fn entropy(args: CommonArgs) -> Result<()> {
    let cfg = resolve(&args)?;
    let mu = cfg.mean_photons_mu()?;
    let adc = adc_of(&cfg)?;
    let p = skellam_pmf(mu, cfg.window_epsilon())?;
    let q = quantize(&p, &adc)?;
    let h = shannon_entropy(&p);
    let row = EntropyRow {
        mu,
        shannon_bits: h.bits,
        truncation_bound_bits: h.truncation_bound_bits,
        min_entropy_bits: min_entropy(&p),
        a_over_k: adc.resolution(),
        quantized_shannon_bits: shannon_entropy(&q).bits,
        quantized_min_entropy_bits: min_entropy(&q),
    };
    match args.format {
        OutputFormat::Json => write_json(&row, args.output.as_deref()),
        OutputFormat::Csv => write_rows(&[row], args.output.as_deref()),
    }
}

fn bounds(args: CommonArgs) -> Result<()> {
    let cfg = resolve(&args)?;
    let mu = cfg.mean_photons_mu()?;
    let adc = adc_of(&cfg)?;
    let mut report = RandomnessReport::per_sample(mu, &adc, cfg.window_epsilon())?;
    if let Some(det) = &cfg.detector {
        if det.response_time_tau.is_some() && det.max_frequency_nu_m.is_some() {
            report = report.with_rates(det)?;
        }
    }
    match args.format {
        OutputFormat::Json => write_json(&report, args.output.as_deref()),
        OutputFormat::Csv => write_reports(&[report], args.format, args.output.as_deref()),
    }
}

#[derive(Serialize)]
struct GaussianRow {
    j: i64,
    skellam: f64,
    gaussian: f64,
}

#[derive(Serialize)]
struct ResolutionRow {
    a_over_k: f64,
    mu: f64,
    r_lower_bits: f64,
}

#[derive(Serialize)]
struct RateRow {
    a_over_k: f64,
    tau: f64,
    mu: f64,
    r_lower_bits: f64,
    rate_lower_bps: f64,
}

fn sweep(args: SweepArgs) -> Result<()> {
    let common = &args.common;
    let cfg = resolve(common)?;
    let eps = cfg.window_epsilon();
    let path = common.output.as_deref();
    match args.figure {
        Figure::SkellamVsGaussian => {
            let mu = if cfg.lo.is_some() || cfg.detector.is_some() { cfg.mean_photons_mu()? } else { 50.0 };
            let cmp = gaussian_comparison(mu, eps)?;
            let rows: Vec<_> = cmp
                .rows
                .iter()
                .map(|&(j, skellam, gaussian)| GaussianRow { j, skellam, gaussian })
                .collect();
            emit(&rows, common.format, path)
        }
        Figure::RandomnessVsMu => {
            let mus = log_grid(args.mu_min, args.mu_max, args.points)?;
            let reports = per_sample_sweep(&mus, &adc_of(&cfg)?, eps)?;
            write_reports(&reports, common.format, path)
        }
        Figure::ResolutionFamily => {
            let mus = log_grid(args.mu_min, args.mu_max, args.points)?;
            let mut rows = Vec::new();
            for &r in &args.resolutions {
                let adc = AdcParams::with_resolution(r)?;
                let values = lower_bound_sweep(&mus, &adc, eps)?;
                rows.extend(mus.iter().zip(values).map(|(&mu, r_lower_bits)| ResolutionRow {
                    a_over_k: r,
                    mu,
                    r_lower_bits,
                }));
            }
            emit(&rows, common.format, path)
        }
        Figure::RateVsTau => {
            let det = cfg.detector.unwrap_or_default();
            let power = det.power_p.unwrap_or(DEFAULT_POWER_W);
            let nu = det.center_frequency_nu.unwrap_or(DEFAULT_FREQUENCY_HZ);
            let taus = log_grid(args.tau_min, args.tau_max, args.points)?;
            let mut rows = Vec::new();
            for &r in &args.resolutions {
                let adc = AdcParams::with_resolution(r)?;
                let pts = rate_vs_response_time(power, nu, &taus, &adc, eps)?;
                rows.extend(pts.into_iter().map(|p| RateRow {
                    a_over_k: r,
                    tau: p.tau,
                    mu: p.mu,
                    r_lower_bits: p.r_lower_bits,
                    rate_lower_bps: p.rate_lower_bps,
                }));
            }
            emit(&rows, common.format, path)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = resolve(&args.common)?;
    let mu = cfg.mean_photons_mu()?;
    let adc = adc_of(&cfg)?;
    let trace = simulate_trace(mu, &adc, args.n, args.seed)?;
    let path = args.common.output.as_deref();
    let layout = args.trace_format.unwrap_or_else(|| match path {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => TraceFormat::Csv,
        _ => TraceFormat::Binary,
    });
    let out = open_output(path)?;
    match layout {
        TraceFormat::Binary => trace.write_binary(out),
        TraceFormat::Csv => trace.write_csv(out),
    }
}

fn read_trace(path: &Path) -> Result<RawTrace> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    if bytes.starts_with(TRACE_MAGIC) {
        RawTrace::read_binary(bytes.as_slice())
    } else {
        RawTrace::read_csv(bytes.as_slice())
    }
}

fn certify_trace(args: CertifyArgs) -> Result<()> {
    let trace = read_trace(&args.input)?;
    let opts = CertifyOptions {
        p_threshold: args.p_threshold,
        min_samples: args.min_samples,
        miller_madow: args.miller_madow,
        ..CertifyOptions::default()
    };
    let result = certify(&trace, &opts)?;
    match args.format {
        OutputFormat::Json => write_json(&result, args.output.as_deref()),
        OutputFormat::Csv => write_rows(&[result], args.output.as_deref()),
    }
}
