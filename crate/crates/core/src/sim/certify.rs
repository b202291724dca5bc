use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{estimate_mu, RawTrace};
use crate::bounds::lower_bound_per_sample;
use crate::dist::{skellam_pmf, DEFAULT_WINDOW_EPSILON};
use crate::entropy::quantize;
use crate::error::{Error, Result};

/// Minimum expected count per pooled chi-square cell.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Goodness-of-fit p-value below which the trace is rejected.
    pub p_threshold: f64,
    pub min_samples: usize,
    /// Add the Miller-Madow bias correction to the plug-in Shannon entropy.
    pub miller_madow: bool,
    pub window_epsilon: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            p_threshold: 0.01,
            min_samples: 1000,
            miller_madow: false,
            window_epsilon: DEFAULT_WINDOW_EPSILON,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    InsufficientData,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::InsufficientData => "insufficient_data",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    pub samples: usize,
    pub estimated_mu: Option<f64>,
    pub mu_standard_error: Option<f64>,
    pub chi_square: Option<f64>,
    pub degrees_of_freedom: Option<usize>,
    pub goodness_of_fit_pvalue: Option<f64>,
    pub empirical_shannon_bits: f64,
    pub empirical_min_entropy_bits: f64,
    pub analytic_r_lower_bits: Option<f64>,
    pub verdict: Verdict,
}

fn histogram(trace: &RawTrace) -> BTreeMap<i64, u64> {
    let mut h = BTreeMap::new();
    for c in trace.signed_codes() {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

fn empirical_entropies(hist: &BTreeMap<i64, u64>, n: usize, miller_madow: bool) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mut shannon = 0.0;
    let mut max = 0u64;
    for &c in hist.values() {
        let p = c as f64 / nf;
        shannon -= p * p.log2();
        max = max.max(c);
    }
    if miller_madow {
        shannon += (hist.len() as f64 - 1.0) / (2.0 * nf * std::f64::consts::LN_2);
    }
    (shannon.max(0.0), -(max as f64 / nf).log2())
}

/// Pearson chi-square of observed code counts against expected cell
/// probabilities. Adjacent codes are pooled from the low end until each cell
/// expects at least five samples; a short final cell joins its neighbor.
fn chi_square(hist: &BTreeMap<i64, u64>, expected: &BTreeMap<i64, f64>, n: usize) -> (f64, usize) {
    let nf = n as f64;
    let lo = *hist.keys().next().unwrap().min(expected.keys().next().unwrap());
    let hi = *hist.keys().next_back().unwrap().max(expected.keys().next_back().unwrap());
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for code in lo..=hi {
        obs += hist.get(&code).copied().unwrap_or(0) as f64;
        exp += expected.get(&code).copied().unwrap_or(0.0) * nf;
        if exp >= MIN_EXPECTED {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    match cells.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => cells.push((obs, exp)),
    }
    let stat = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    (stat, cells.len())
}

/// Tests a trace against the Skellam model at the estimated `mu`.
///
/// The model has one fitted parameter, so the chi-square test uses
/// `cells - 2` degrees of freedom. With fewer than three cells no test is
/// possible; the p-value is then 1 for a perfect match and 0 otherwise.
/// Saturated traces are reported as an estimation error.
pub fn certify(trace: &RawTrace, opts: &CertifyOptions) -> Result<CertificationResult> {
    if !(opts.p_threshold > 0.0 && opts.p_threshold < 1.0) {
        return Err(Error::domain("p threshold must lie in (0, 1)"));
    }
    let n = trace.len();
    let hist = histogram(trace);
    let (shannon, min_ent) = empirical_entropies(&hist, n, opts.miller_madow);
    let mut result = CertificationResult {
        samples: n,
        estimated_mu: None,
        mu_standard_error: None,
        chi_square: None,
        degrees_of_freedom: None,
        goodness_of_fit_pvalue: None,
        empirical_shannon_bits: shannon,
        empirical_min_entropy_bits: min_ent,
        analytic_r_lower_bits: None,
        verdict: Verdict::InsufficientData,
    };
    if n < opts.min_samples.max(super::MIN_ESTIMATION_SAMPLES) {
        return Ok(result);
    }
    let est = estimate_mu(trace)?;
    let model = quantize(&skellam_pmf(est.mu, opts.window_epsilon)?, &trace.adc)?;
    let expected: BTreeMap<i64, f64> = model.iter().collect();
    let (stat, cells) = chi_square(&hist, &expected, n);
    let pvalue = if cells >= 3 {
        let df = (cells - 2) as f64;
        let dist = ChiSquared::new(df).map_err(|e| Error::Estimation(e.to_string()))?;
        dist.sf(stat)
    } else if stat == 0.0 {
        1.0
    } else {
        0.0
    };
    result.estimated_mu = Some(est.mu);
    result.mu_standard_error = Some(est.standard_error);
    result.chi_square = Some(stat);
    result.degrees_of_freedom = Some(cells.saturating_sub(2));
    result.goodness_of_fit_pvalue = Some(pvalue);
    result.analytic_r_lower_bits = Some(lower_bound_per_sample(est.mu, &trace.adc, opts.window_epsilon)?);
    result.verdict = if pvalue >= opts.p_threshold { Verdict::Consistent } else { Verdict::Inconsistent };
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::AdcParams;
    use crate::sim::simulate_trace;

    #[test]
    fn short_trace_is_insufficient() {
        let adc = AdcParams::symmetric(1.0, 1.0, 8).unwrap();
        let t = simulate_trace(3.0, &adc, 500, 1).unwrap();
        let r = certify(&t, &CertifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::InsufficientData);
        assert!(r.goodness_of_fit_pvalue.is_none());
        assert!(r.empirical_shannon_bits > 0.0);
    }

    #[test]
    fn simulated_trace_is_consistent() {
        let adc = AdcParams::symmetric(1.0, 1.0, 12).unwrap();
        let t = simulate_trace(20.0, &adc, 200_000, 7).unwrap();
        let r = certify(&t, &CertifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent, "{r:?}");
        let mu = r.estimated_mu.unwrap();
        assert!((mu - 20.0).abs() < 5.0 * r.mu_standard_error.unwrap());
        assert!(r.empirical_min_entropy_bits <= r.empirical_shannon_bits);
    }

    #[test]
    fn uniform_trace_is_inconsistent() {
        let adc = AdcParams::symmetric(1.0, 1.0, 8).unwrap();
        let samples = (0..100_000u32).map(|i| i.wrapping_mul(2_654_435_761) >> 24).collect();
        let t = RawTrace::new(samples, adc, 1.0, None, "uniform").unwrap();
        let r = certify(&t, &CertifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconsistent, "{r:?}");
        assert!(r.goodness_of_fit_pvalue.unwrap() < 1e-6);
    }

    #[test]
    fn constant_zero_trace_matches_vacuum_limit() {
        let adc = AdcParams::symmetric(1.0, 1.0, 8).unwrap();
        let t = RawTrace::new(vec![adc.unsigned_code(0); 5000], adc, 1.0, None, "dark").unwrap();
        let r = certify(&t, &CertifyOptions::default()).unwrap();
        assert_eq!(r.estimated_mu, Some(0.0));
        assert_eq!(r.goodness_of_fit_pvalue, Some(1.0));
        assert_eq!(r.verdict, Verdict::Consistent);
        assert_eq!(r.empirical_shannon_bits, 0.0);
    }

    #[test]
    fn miller_madow_raises_estimate() {
        let adc = AdcParams::symmetric(1.0, 1.0, 8).unwrap();
        let t = simulate_trace(5.0, &adc, 2000, 3).unwrap();
        let plain = certify(&t, &CertifyOptions::default()).unwrap();
        let mm = certify(&t, &CertifyOptions { miller_madow: true, ..Default::default() }).unwrap();
        assert!(mm.empirical_shannon_bits > plain.empirical_shannon_bits);
    }
}
