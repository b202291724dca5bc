//! Randomness quantifiers on pmfs and the ADC quantization model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{Pmf, SignalParams};
use crate::error::{Error, Result};
use crate::specfun::{log_add, LogValue};

/// Entropy in bits plus a bound on the error from the truncated tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub bits: f64,
    pub truncation_bound_bits: f64,
}

/// Shannon entropy `-sum p log2 p` over the stored window.
pub fn shannon_entropy(p: &Pmf) -> EntropyEstimate {
    let nats: f64 = p
        .log_probs()
        .iter()
        .filter(|lp| !lp.is_zero())
        .map(|lp| -lp.exp() * lp.ln())
        .sum();
    EntropyEstimate {
        // + 0.0 turns the -0.0 of a point mass into 0.0
        bits: nats / std::f64::consts::LN_2 + 0.0,
        truncation_bound_bits: truncation_bound(p.tail_mass_bound(), p.len()),
    }
}

// First-order bound on the entropy carried by excluded mass `delta`:
// delta * (log2(1/delta) + log2(window length + 1)).
fn truncation_bound(delta: f64, window: usize) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    delta * (-delta.log2() + ((window + 1) as f64).log2())
}

/// Classical min-entropy `-log2 max_j p_j` in bits.
pub fn min_entropy(p: &Pmf) -> f64 {
    let bits = -p.max_log_prob().log2();
    // -0.0 for a point mass
    bits + 0.0
}

/// Digitizer description. Voltages are `k * N_d` for a photon-number
/// difference `N_d`; code `m` covers voltages around `(m + offset) * a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdcParams {
    /// Width of one quantization interval (voltage units).
    pub interval_a: f64,
    /// Volts per photon.
    pub gain_k: f64,
    pub bit_depth: u32,
    /// Saturation bounds (voltage units).
    pub input_range: (f64, f64),
    /// Bin alignment shift in units of `a`; 0 centers a bin on zero.
    #[serde(default)]
    pub offset: f64,
}

impl AdcParams {
    pub fn new(interval_a: f64, gain_k: f64, bit_depth: u32, input_range: (f64, f64)) -> Result<Self> {
        let adc = AdcParams { interval_a, gain_k, bit_depth, input_range, offset: 0.0 };
        adc.validate()?;
        Ok(adc)
    }

    /// Two's-complement style converter: codes `-2^(b-1) ..= 2^(b-1) - 1`
    /// with the zero code centered on zero photons.
    pub fn symmetric(interval_a: f64, gain_k: f64, bit_depth: u32) -> Result<Self> {
        if !(1..=32).contains(&bit_depth) {
            return Err(Error::domain(format!("bit depth must lie in 1..=32, got {bit_depth}")));
        }
        let half = (1u64 << (bit_depth - 1)) as f64;
        AdcParams::new(interval_a, gain_k, bit_depth, (-half * interval_a, (half - 1.0) * interval_a))
    }

    /// Resolution `a / k` in photons, with unit gain and a wide 16-bit range.
    pub fn with_resolution(a_over_k: f64) -> Result<Self> {
        AdcParams::symmetric(a_over_k, 1.0, 16)
    }

    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain_k > 0.0) || !self.gain_k.is_finite() {
            return Err(Error::domain(format!("ADC gain must be finite and > 0, got {}", self.gain_k)));
        }
        if !(self.interval_a > 0.0) || !self.interval_a.is_finite() {
            return Err(Error::domain(format!(
                "quantization interval must be finite and > 0, got {}",
                self.interval_a
            )));
        }
        if !(1..=32).contains(&self.bit_depth) {
            return Err(Error::domain(format!("bit depth must lie in 1..=32, got {}", self.bit_depth)));
        }
        let (lo, hi) = self.input_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!("invalid input range ({lo}, {hi})")));
        }
        if !self.offset.is_finite() {
            return Err(Error::domain("ADC offset must be finite"));
        }
        let (min, max) = self.code_bounds();
        if min > max {
            return Err(Error::domain("input range contains no bin center"));
        }
        let codes = (max - min + 1) as u64;
        if codes > 1u64 << self.bit_depth {
            return Err(Error::domain(format!(
                "input range spans {codes} bins, more than 2^{} codes",
                self.bit_depth
            )));
        }
        Ok(())
    }

    /// Resolution in photon-difference units.
    pub fn resolution(&self) -> f64 {
        self.interval_a / self.gain_k
    }

    /// Lowest and highest representable signed codes.
    pub fn code_bounds(&self) -> (i64, i64) {
        let a = self.interval_a;
        let lo = (self.input_range.0 / a - self.offset - 1e-9).ceil() as i64;
        let hi = (self.input_range.1 / a - self.offset + 1e-9).floor() as i64;
        (lo, hi)
    }

    /// Signed code for a photon-number difference, after saturation.
    ///
    /// Bin edges sit at half-integer multiples of the resolution; a count
    /// landing exactly on an edge goes to the bin nearer zero, so the zero
    /// bin is the closed interval `[-a/2k, a/2k]`.
    pub fn code_for_count(&self, count: i64) -> i64 {
        let x = snap_half(count as f64 / self.resolution() - self.offset);
        let m = if x >= 0.0 { (x - 0.5).ceil() } else { -(-x - 0.5).ceil() };
        let (lo, hi) = self.code_bounds();
        (m as i64).clamp(lo, hi)
    }

    /// Unsigned code as stored in raw traces, `0 ..= 2^bits - 1`.
    pub fn unsigned_code(&self, signed: i64) -> u32 {
        (signed - self.code_bounds().0) as u32
    }

    pub fn signed_code(&self, unsigned: u32) -> i64 {
        unsigned as i64 + self.code_bounds().0
    }

    /// Bin center of a signed code in photon-difference units.
    pub fn code_center(&self, signed: i64) -> f64 {
        (signed as f64 + self.offset) * self.resolution()
    }
}

// Values within 1e-9 of a half-integer are treated as exactly on the edge.
fn snap_half(x: f64) -> f64 {
    let h = (2.0 * x).round() / 2.0;
    if (x - h).abs() < 1e-9 {
        h
    } else {
        x
    }
}

/// Pushes a pmf over photon-number differences through the ADC: each code
/// collects the mass of the counts mapped to it, saturated counts pile into
/// the edge codes. The result is a pmf over signed codes.
pub fn quantize(p: &Pmf, adc: &AdcParams) -> Result<Pmf> {
    adc.validate()?;
    let mut bins: BTreeMap<i64, LogValue> = BTreeMap::new();
    for (i, &lp) in p.log_probs().iter().enumerate() {
        if lp.is_zero() {
            continue;
        }
        let code = adc.code_for_count(p.offset() + i as i64);
        let slot = bins.entry(code).or_insert(LogValue::ZERO);
        *slot = log_add(*slot, lp);
    }
    let (&first, _) = bins
        .first_key_value()
        .ok_or_else(|| Error::domain("cannot quantize a pmf with no mass"))?;
    let (&last, _) = bins.last_key_value().unwrap();
    let log_probs = (first..=last)
        .map(|m| bins.get(&m).copied().unwrap_or(LogValue::ZERO))
        .collect();
    Ok(Pmf::from_parts(first, log_probs, p.tail_mass_bound()))
}

/// Mean and variance of the balanced photocurrent in the strong-LO
/// (classical) picture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStats {
    pub mean: f64,
    pub variance: f64,
}

/// Photocurrent statistics for a coherent (or vacuum) signal:
/// mean `2k|alpha| <x(phi)>` and variance
/// `4k^2|alpha|^2 Var x(phi) + k^2 <n>`, with `phi = arg(alpha)`.
/// For a coherent state `<x(phi)> = Re(beta e^{-i phi})`, `Var x = 1/4`,
/// `<n> = |beta|^2`.
pub fn classical_quadrature_stats(sig: &SignalParams, gain_k: f64) -> Result<QuadratureStats> {
    if !(gain_k > 0.0) || !gain_k.is_finite() {
        return Err(Error::domain(format!("gain must be finite and > 0, got {gain_k}")));
    }
    let beta = sig.amplitude_beta;
    let alpha = sig.lo_amplitude;
    if !(beta.re.is_finite() && beta.im.is_finite() && alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::domain("signal and LO amplitudes must be finite"));
    }
    let lo_mag = alpha.norm();
    let phase = num_complex::Complex64::from_polar(1.0, -alpha.arg());
    let x_mean = (beta * phase).re;
    let x_var = 0.25;
    let photons = beta.norm_sqr();
    Ok(QuadratureStats {
        mean: 2.0 * gain_k * lo_mag * x_mean,
        variance: 4.0 * gain_k * gain_k * alpha.norm_sqr() * x_var + gain_k * gain_k * photons,
    })
}
