use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shotqrng::bounds::RandomnessReport;
use shotqrng::dist::{skellam_pmf, Pmf, PmfRecord};
use shotqrng::sim::{CertificationResult, RawTrace, Verdict};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shotqrng"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("SHOTQRNG_PRESET_DIR").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn figure_two_csv_covers_the_window() {
    let text = ok(&["sweep", "--figure", "2", "--mu", "50", "--format", "csv"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,skellam,gaussian"));
    let rows: Vec<(i64, f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    let pmf = skellam_pmf(50.0, 1e-12).unwrap();
    assert_eq!(rows.len(), pmf.len());
    assert_eq!(rows[0].0, *pmf.support().start());
    let center = rows.iter().find(|r| r.0 == 0).unwrap();
    let gauss0 = 1.0 / (2.0 * std::f64::consts::PI * 100.0).sqrt();
    assert_eq!(center.1, pmf.prob(0));
    assert!((center.2 - gauss0).abs() < 1e-15);
}

#[test]
fn zero_mu_bounds_are_zero() {
    let report: RandomnessReport = serde_json::from_str(&ok(&["bounds", "--mu", "0"])).unwrap();
    for v in [report.r0_bits, report.r1_bits, report.r_upper_bits, report.r_lower_bits] {
        assert_eq!(v.to_bits(), 0.0f64.to_bits());
    }
}

#[test]
fn simulate_then_certify_is_consistent() {
    let trace = scratch("mu50.sqrt");
    let t = trace.to_str().unwrap();
    ok(&["simulate", "--mu", "50", "--n", "1000000", "--seed", "7", "-o", t]);
    let result: CertificationResult = serde_json::from_str(&ok(&["certify", t])).unwrap();
    assert_eq!(result.verdict, Verdict::Consistent, "{result:?}");
    assert_eq!(result.samples, 1_000_000);
    let mu = result.estimated_mu.unwrap();
    assert!((mu - 50.0).abs() < 5.0 * result.mu_standard_error.unwrap());
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["simulate", "--mu", "3.5", "--n", "200000", "--seed", "11"][..],
        &["sweep", "--figure", "3", "--format", "csv"][..],
        &["sweep", "--figure", "4", "--points", "20", "--format", "json"][..],
        &["sweep", "--figure", "rate", "--points", "30", "--format", "csv"][..],
        &["bounds", "--preset", "fast_pin"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn emitted_files_read_back() {
    let csv = scratch("pmf.csv");
    let json = scratch("pmf.json");
    ok(&["pmf", "--mu", "12.5", "--format", "csv", "-o", csv.to_str().unwrap()]);
    ok(&["pmf", "--mu", "12.5", "--format", "json", "-o", json.to_str().unwrap()]);
    let from_csv = Pmf::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    let record: PmfRecord = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let from_json = record.into_pmf().unwrap();
    let direct = skellam_pmf(12.5, 1e-12).unwrap();
    assert_eq!(from_json, direct);
    assert_eq!(from_csv.support(), direct.support());

    let trace_csv = scratch("trace.csv");
    ok(&["simulate", "--mu", "2", "--n", "5000", "--seed", "1", "--bit-depth", "8", "-o", trace_csv.to_str().unwrap()]);
    let trace = RawTrace::read_csv(std::io::BufReader::new(std::fs::File::open(&trace_csv).unwrap())).unwrap();
    assert_eq!(trace.len(), 5000);
    assert_eq!(trace.seed, Some(1));
    let result: CertificationResult = serde_json::from_str(&ok(&["certify", trace_csv.to_str().unwrap()])).unwrap();
    assert_eq!(result.samples, 5000);

    let report = scratch("report.json");
    ok(&["bounds", "--preset", "slow_photodiode", "-o", report.to_str().unwrap()]);
    let r: RandomnessReport = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(r.is_ordered() && r.rate_lower_bps.unwrap() > 0.0);
}

#[test]
fn config_file_layers_over_preset() {
    let cfg = scratch("override.toml");
    std::fs::write(&cfg, "[lo]\nmean_photons_mu = 8.0\n[adc]\ninterval_a = 2.0\ngain_k = 1.0\n").unwrap();
    let r: RandomnessReport =
        serde_json::from_str(&ok(&["bounds", "--preset", "balanced_receiver", "--config", cfg.to_str().unwrap()])).unwrap();
    assert_eq!(r.mu, 8.0);
    assert_eq!(r.metadata.adc.resolution(), 2.0);
    assert!(r.rate_ceiling_hz.is_some());
}

#[test]
fn preset_directory_from_environment() {
    let dir = scratch("presets");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("presets.toml"),
        "[lab_bench]\n[lab_bench.lo]\nmean_photons_mu = 4.0\n",
    )
    .unwrap();
    let out = bin()
        .args(["bounds", "--preset", "lab_bench"])
        .env("SHOTQRNG_PRESET_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let r: RandomnessReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.mu, 4.0);
}

fn expect_failure(args: &[&str], code: i32, kind: &str) {
    let out = run(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error kind={kind} msg=\"")), "{err}");
}

#[test]
fn errors_map_to_exit_codes() {
    expect_failure(&["bounds", "--mu", "-1"], 1, "domain");
    expect_failure(&["bounds", "--preset", "no_such_preset"], 2, "config");
    expect_failure(&["bounds"], 2, "config");
    expect_failure(&["bounds", "--not-a-flag"], 2, "config");
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "[adc]\ninterval = 1\n").unwrap();
    expect_failure(&["bounds", "--config", bad.to_str().unwrap()], 2, "config");
    expect_failure(&["bounds", "--mu", "1", "-o", "/nonexistent-dir/out.json"], 3, "io");
    expect_failure(&["certify", "/nonexistent-dir/trace.bin"], 3, "io");
    let garbage = scratch("garbage.bin");
    std::fs::write(&garbage, b"SQRT\x09\x00").unwrap();
    expect_failure(&["certify", garbage.to_str().unwrap()], 3, "format");
}
