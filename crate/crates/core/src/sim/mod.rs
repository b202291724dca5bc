//! Monte Carlo model of the generator pipeline and certification of traces.
//!
//! A sample is `quantize(k (N0 - N1))` with `N0`, `N1` independent
//! Poisson(`mu`) photon counts. Simulation is split into fixed-size chunks,
//! chunk `i` drawing from ChaCha stream `(seed, i)`, so the output does not
//! depend on the number of worker threads.

mod certify;
mod trace;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::{Deserialize, Serialize};

use crate::dist::{skellam_pmf, stream_rng, PoissonSampler, DEFAULT_WINDOW_EPSILON};
use crate::entropy::{quantize, AdcParams};
use crate::error::{Error, Result};

pub use certify::{certify, CertificationResult, CertifyOptions, Verdict};
pub use trace::{RawTrace, TRACE_MAGIC, TRACE_VERSION};

/// Samples per independent RNG stream.
pub const CHUNK_SAMPLES: usize = 1 << 16;

/// Nominal sample rate stamped on simulated traces.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1.0;

/// Minimum trace length accepted by [`estimate_mu`].
pub const MIN_ESTIMATION_SAMPLES: usize = 1000;

/// Fraction of samples in the edge codes above which a trace counts as
/// saturated.
pub const SATURATION_FRACTION: f64 = 0.01;

fn fill_chunk(sampler: &PoissonSampler, adc: &AdcParams, seed: u64, index: usize, out: &mut [u32]) {
    let mut rng = stream_rng(seed, index as u64);
    for slot in out {
        let n0 = sampler.sample(&mut rng) as i64;
        let n1 = sampler.sample(&mut rng) as i64;
        *slot = adc.unsigned_code(adc.code_for_count(n0 - n1));
    }
}

/// Simulates `n` digitized samples of vacuum homodyne detection with
/// per-detector mean photon number `mu`.
pub fn simulate_trace(mu: f64, adc: &AdcParams, n: usize, seed: u64) -> Result<RawTrace> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::domain(format!("mu must be finite and >= 0, got {mu}")));
    }
    if n == 0 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    adc.validate()?;
    let sampler = PoissonSampler::new(mu);
    let mut samples = vec![0u32; n];

    #[cfg(feature = "parallel")]
    samples
        .par_chunks_mut(CHUNK_SAMPLES)
        .enumerate()
        .for_each(|(i, chunk)| fill_chunk(&sampler, adc, seed, i, chunk));
    #[cfg(not(feature = "parallel"))]
    samples
        .chunks_mut(CHUNK_SAMPLES)
        .enumerate()
        .for_each(|(i, chunk)| fill_chunk(&sampler, adc, seed, i, chunk));

    RawTrace::new(samples, *adc, DEFAULT_SAMPLE_RATE_HZ, Some(seed), format!("simulated mu={mu}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub mu: f64,
    pub standard_error: f64,
}

/// Variance of the reconstructed sample (photon units) under the quantized
/// Skellam model.
fn model_center_variance(mu: f64, adc: &AdcParams) -> Result<f64> {
    let q = quantize(&skellam_pmf(mu, DEFAULT_WINDOW_EPSILON)?, adc)?;
    let r = adc.resolution();
    Ok(r * r * q.variance())
}

/// Per-detector mean photon number from the trace variance,
/// `Var(N_d) = 2 mu`.
///
/// When each bin holds at most one integer (`a/k <= 1`) the photon-number
/// difference is recovered exactly and `mu = s^2 / 2` with the `n - 1`
/// sample variance. Coarser bins hold unequal numbers of integers, so the
/// variance of bin centers is matched against the quantized Skellam model
/// instead and solved for `mu` by bisection.
pub fn estimate_mu(trace: &RawTrace) -> Result<MuEstimate> {
    let n = trace.len();
    if n < MIN_ESTIMATION_SAMPLES {
        return Err(Error::Estimation(format!(
            "need at least {MIN_ESTIMATION_SAMPLES} samples, got {n}"
        )));
    }
    let (lo, hi) = trace.adc.code_bounds();
    let edge = trace.signed_codes().filter(|&c| c == lo || c == hi).count();
    if edge as f64 >= SATURATION_FRACTION * n as f64 {
        return Err(Error::Estimation(format!(
            "trace is saturated: {:.2}% of samples in edge codes",
            100.0 * edge as f64 / n as f64
        )));
    }
    let exact = trace.adc.resolution() <= 1.0;
    let value = |c: i64| {
        let center = trace.adc.code_center(c);
        if exact {
            center.round()
        } else {
            center
        }
    };
    let nf = n as f64;
    let mean = trace.signed_codes().map(value).sum::<f64>() / nf;
    let (m2, m4) = trace.signed_codes().fold((0.0, 0.0), |(s2, s4), c| {
        let d = value(c) - mean;
        let d2 = d * d;
        (s2 + d2, s4 + d2 * d2)
    });
    let var = m2 / (nf - 1.0);
    let m2n = m2 / nf;
    let var_se = ((m4 / nf - m2n * m2n) / nf).max(0.0).sqrt();
    if exact {
        return Ok(MuEstimate { mu: var / 2.0, standard_error: var_se / 2.0 });
    }
    if var <= model_center_variance(0.0, &trace.adc)? {
        return Ok(MuEstimate { mu: 0.0, standard_error: var_se / 2.0 });
    }
    let mut lo_mu = 0.0;
    let mut hi_mu = (var / 2.0).max(1.0);
    while model_center_variance(hi_mu, &trace.adc)? < var {
        lo_mu = hi_mu;
        hi_mu *= 2.0;
        if hi_mu > 1e15 {
            return Err(Error::Estimation("variance too large to invert".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo_mu + hi_mu);
        if hi_mu - lo_mu <= 1e-12 * hi_mu {
            break;
        }
        if model_center_variance(mid, &trace.adc)? < var {
            lo_mu = mid;
        } else {
            hi_mu = mid;
        }
    }
    let mu = 0.5 * (lo_mu + hi_mu);
    // delta method through the local slope of the model variance
    let h = 1e-3 * mu.max(1.0);
    let slope = (model_center_variance(mu + h, &trace.adc)? - model_center_variance((mu - h).max(0.0), &trace.adc)?)
        / (mu + h - (mu - h).max(0.0));
    let standard_error = if slope > 0.0 { var_se / slope } else { var_se / 2.0 };
    Ok(MuEstimate { mu, standard_error })
}

/// Sample autocorrelation of the signed codes at `lag`.
pub fn autocorrelation(trace: &RawTrace, lag: usize) -> f64 {
    let xs: Vec<f64> = trace.signed_codes().map(|c| c as f64).collect();
    if lag >= xs.len() {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = xs.iter().zip(&xs[lag..]).map(|(a, b)| (a - mean) * (b - mean)).sum();
    cov / var
}
