//! Per-sample randomness bounds and hardware-limited generation rates.
//!
//! `R^U` takes the total mean photon number `2 mu` seen by both detectors,
//! `R^L` takes the per-detector mean `mu`. Reports carry both.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{poisson_pmf, skellam_pmf};
use crate::entropy::{quantize, shannon_entropy, AdcParams};
use crate::error::{Error, Result};

/// Planck constant, J s (exact SI value).
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Laser and photodetector parameters. Fields are optional so that config
/// files may supply partial descriptions; operations report which field is
/// missing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    /// Photodetector response time tau, seconds.
    #[serde(default)]
    pub response_time_tau: Option<f64>,
    /// Maximum laser frequency nu_m, Hz. `inf` disables the Nyquist limit.
    #[serde(default)]
    pub max_frequency_nu_m: Option<f64>,
    /// LO optical power P, watts.
    #[serde(default)]
    pub power_p: Option<f64>,
    /// Laser center frequency nu, Hz.
    #[serde(default)]
    pub center_frequency_nu: Option<f64>,
    /// ADC sampling frequency f, Hz. Informational.
    #[serde(default)]
    pub sampling_frequency_f: Option<f64>,
}

fn require(name: &str, v: Option<f64>) -> Result<f64> {
    let v = v.ok_or_else(|| Error::config(format!("detector parameter `{name}` is missing")))?;
    if v.is_nan() || v <= 0.0 {
        return Err(Error::domain(format!("detector parameter `{name}` must be > 0, got {v}")));
    }
    Ok(v)
}

impl DetectorParams {
    /// Mean photon number of the LO within one response time,
    /// `2 mu = P tau / (h nu)`. Zero power is allowed.
    pub fn total_mean_photons(&self) -> Result<f64> {
        let tau = require("response_time_tau", self.response_time_tau)?;
        let nu = require("center_frequency_nu", self.center_frequency_nu)?;
        let p = self
            .power_p
            .ok_or_else(|| Error::config("detector parameter `power_p` is missing"))?;
        if !p.is_finite() || p < 0.0 {
            return Err(Error::domain(format!("LO power must be finite and >= 0, got {p}")));
        }
        if !tau.is_finite() || !nu.is_finite() {
            return Err(Error::domain("response time and center frequency must be finite"));
        }
        Ok(p * tau / (PLANCK_H * nu))
    }

    /// Per-detector mean photon number `mu = P tau / (2 h nu)`.
    pub fn mean_photons_per_detector(&self) -> Result<f64> {
        Ok(self.total_mean_photons()? / 2.0)
    }
}

/// `R^U = log2(2 mu + 1) + H(Poisson(2 mu))`, bits per sample.
pub fn upper_bound_per_sample(two_mu: f64, window_epsilon: f64) -> Result<f64> {
    if !two_mu.is_finite() || two_mu < 0.0 {
        return Err(Error::domain(format!("2mu must be finite and >= 0, got {two_mu}")));
    }
    let h = shannon_entropy(&poisson_pmf(two_mu, window_epsilon)?).bits;
    Ok((two_mu + 1.0).log2() + h)
}

/// `R^L = -log2 P_0`: min-entropy of the zero-photon ADC bin of the
/// quantized Skellam output, bits per sample.
pub fn lower_bound_per_sample(mu: f64, adc: &AdcParams, window_epsilon: f64) -> Result<f64> {
    let q = quantize(&skellam_pmf(mu, window_epsilon)?, adc)?;
    let central = adc.code_for_count(0);
    Ok(-q.log_prob(central).log2() + 0.0)
}

/// Useful sampling-rate ceiling `min(1/tau, 2 nu_m)`, Hz.
pub fn rate_ceiling(det: &DetectorParams) -> Result<f64> {
    let tau = require("response_time_tau", det.response_time_tau)?;
    let nu_m = require("max_frequency_nu_m", det.max_frequency_nu_m)?;
    Ok((1.0 / tau).min(2.0 * nu_m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub adc: AdcParams,
    pub detector: Option<DetectorParams>,
    pub window_epsilon: f64,
}

/// Randomness per sample (bits) and, when a detector is known, the
/// corresponding generation rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    /// Per-detector mean photon number.
    pub mu: f64,
    /// Total mean photon number, the argument of `R^U`.
    pub two_mu: f64,
    /// Shannon entropy of one detector's Poisson counts.
    pub r0_bits: f64,
    /// Shannon entropy of the Skellam difference.
    pub r1_bits: f64,
    pub r_upper_bits: f64,
    pub r_lower_bits: f64,
    pub rate_ceiling_hz: Option<f64>,
    pub rate_upper_bps: Option<f64>,
    pub rate_lower_bps: Option<f64>,
    pub metadata: ReportMetadata,
}

pub const REPORT_CSV_HEADER: &str =
    "mu,two_mu,r0_bits,r1_bits,r_upper_bits,r_lower_bits,rate_ceiling_hz,rate_upper_bps,rate_lower_bps,a_over_k,window_epsilon";

impl RandomnessReport {
    /// Per-sample quantities only.
    pub fn per_sample(mu: f64, adc: &AdcParams, window_epsilon: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::domain(format!("mu must be finite and >= 0, got {mu}")));
        }
        adc.validate()?;
        let two_mu = 2.0 * mu;
        Ok(RandomnessReport {
            mu,
            two_mu,
            r0_bits: shannon_entropy(&poisson_pmf(mu, window_epsilon)?).bits,
            r1_bits: shannon_entropy(&skellam_pmf(mu, window_epsilon)?).bits,
            r_upper_bits: upper_bound_per_sample(two_mu, window_epsilon)?,
            r_lower_bits: lower_bound_per_sample(mu, adc, window_epsilon)?,
            rate_ceiling_hz: None,
            rate_upper_bps: None,
            rate_lower_bps: None,
            metadata: ReportMetadata { adc: *adc, detector: None, window_epsilon },
        })
    }

    /// `r_lower <= r1 <= r_upper`, with a little rounding slack.
    pub fn is_ordered(&self) -> bool {
        let slack = 1e-12;
        self.r_lower_bits <= self.r1_bits + slack && self.r1_bits <= self.r_upper_bits + slack
    }

    /// Adds the rate ceiling of `det` and the corresponding rates.
    pub fn with_rates(mut self, det: &DetectorParams) -> Result<Self> {
        let ceiling = rate_ceiling(det)?;
        self.rate_ceiling_hz = Some(ceiling);
        self.rate_upper_bps = Some(ceiling * self.r_upper_bits);
        self.rate_lower_bps = Some(ceiling * self.r_lower_bits);
        self.metadata.detector = Some(*det);
        Ok(self)
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{},{},{},{:?},{:?}",
            self.mu,
            self.two_mu,
            self.r0_bits,
            self.r1_bits,
            self.r_upper_bits,
            self.r_lower_bits,
            opt(self.rate_ceiling_hz),
            opt(self.rate_upper_bps),
            opt(self.rate_lower_bps),
            self.metadata.adc.resolution(),
            self.metadata.window_epsilon,
        )
    }
}

/// Full report for a laser/detector/ADC combination:
/// `rate_upper = min(1/tau, 2 nu_m) R^U`, `rate_lower = min(1/tau, 2 nu_m) R^L`.
pub fn total_rates(det: &DetectorParams, adc: &AdcParams, window_epsilon: f64) -> Result<RandomnessReport> {
    let mu = det.mean_photons_per_detector()?;
    RandomnessReport::per_sample(mu, adc, window_epsilon)?.with_rates(det)
}

/// `n` points spaced evenly in log from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::domain(format!("log grid needs 0 < lo <= hi and n >= 1, got [{lo}, {hi}], n={n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

fn map_ordered<T: Send, F>(xs: &[f64], f: F) -> Result<Vec<T>>
where
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return xs.par_iter().map(|&x| f(x)).collect();
    #[cfg(not(feature = "parallel"))]
    return xs.iter().map(|&x| f(x)).collect();
}

/// Per-sample reports over a grid of `mu`, in input order.
pub fn per_sample_sweep(mus: &[f64], adc: &AdcParams, window_epsilon: f64) -> Result<Vec<RandomnessReport>> {
    map_ordered(mus, |mu| RandomnessReport::per_sample(mu, adc, window_epsilon))
}

/// `R^L` over a grid of `mu`, in input order.
pub fn lower_bound_sweep(mus: &[f64], adc: &AdcParams, window_epsilon: f64) -> Result<Vec<f64>> {
    map_ordered(mus, |mu| lower_bound_per_sample(mu, adc, window_epsilon))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub tau: f64,
    pub mu: f64,
    pub r_lower_bits: f64,
    pub rate_lower_bps: f64,
}

/// Lower-bound rate `R^L / tau` over a grid of response times, in input order.
pub fn rate_vs_response_time(
    power_w: f64,
    center_frequency_hz: f64,
    taus: &[f64],
    adc: &AdcParams,
    window_epsilon: f64,
) -> Result<Vec<RatePoint>> {
    map_ordered(taus, |tau| {
        let det = DetectorParams {
            response_time_tau: Some(tau),
            power_p: Some(power_w),
            center_frequency_nu: Some(center_frequency_hz),
            ..Default::default()
        };
        let mu = det.mean_photons_per_detector()?;
        let r = lower_bound_per_sample(mu, adc, window_epsilon)?;
        Ok(RatePoint { tau, mu, r_lower_bits: r, rate_lower_bps: r / tau })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DEFAULT_WINDOW_EPSILON as EPS;

    fn det(tau: f64, nu_m: f64) -> DetectorParams {
        DetectorParams {
            response_time_tau: Some(tau),
            max_frequency_nu_m: Some(nu_m),
            ..Default::default()
        }
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(upper_bound_per_sample(0.0, EPS).unwrap(), 0.0);
        // mpmath: log2(101) + H(Poisson(100))
        let r = upper_bound_per_sample(100.0, EPS).unwrap();
        assert!((r - 12.026_026_827_906_306).abs() < 1e-10);
        assert!(upper_bound_per_sample(10.0, EPS).unwrap() < r);
        assert!(upper_bound_per_sample(-1.0, EPS).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let adc1 = AdcParams::with_resolution(1.0).unwrap();
        assert_eq!(lower_bound_per_sample(0.0, &adc1, EPS).unwrap(), 0.0);
        let r1 = lower_bound_per_sample(50.0, &adc1, EPS).unwrap();
        assert!((r1 - 4.645_863_678_556_676).abs() < 1e-11);
        let adc3 = AdcParams::with_resolution(3.0).unwrap();
        let r3 = lower_bound_per_sample(50.0, &adc3, EPS).unwrap();
        assert!((r3 - 3.065_730_379_404_036).abs() < 1e-11);
        assert!(r1 >= r3);
    }

    #[test]
    fn rate_ceiling_examples() {
        assert_eq!(rate_ceiling(&det(1e-10, 1e20)).unwrap(), 1e10);
        assert_eq!(rate_ceiling(&det(1.0, 0.25)).unwrap(), 0.5);
        assert_eq!(rate_ceiling(&det(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(rate_ceiling(&det(1.0, f64::INFINITY)).unwrap(), 1.0);
        let missing = DetectorParams { response_time_tau: Some(1.0), ..Default::default() };
        assert!(matches!(rate_ceiling(&missing), Err(Error::Config(_))));
        assert!(matches!(rate_ceiling(&det(-1.0, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_power_report_is_all_zero() {
        let d = DetectorParams {
            power_p: Some(0.0),
            center_frequency_nu: Some(1.9e14),
            ..det(1e-10, 1e20)
        };
        let r = total_rates(&d, &AdcParams::with_resolution(1.0).unwrap(), EPS).unwrap();
        assert_eq!(r.mu, 0.0);
        for v in [r.r0_bits, r.r1_bits, r.r_upper_bits, r.r_lower_bits] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(r.rate_upper_bps, Some(0.0));
        assert_eq!(r.rate_lower_bps, Some(0.0));
    }

    #[test]
    fn report_is_ordered_and_serializes() {
        let d = DetectorParams {
            power_p: Some(1e-9),
            center_frequency_nu: Some(1.934e14),
            ..det(1e-9, 5e9)
        };
        let r = total_rates(&d, &AdcParams::with_resolution(1.0).unwrap(), EPS).unwrap();
        assert!(r.is_ordered());
        assert!((r.rate_ceiling_hz.unwrap() - 1e9).abs() <= 1e9 * 1e-15);
        let json = serde_json::to_string(&r).unwrap();
        let back: RandomnessReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.csv_row().split(',').count(), REPORT_CSV_HEADER.split(',').count());
    }
}
