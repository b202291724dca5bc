//! Log-domain special functions.
//!
//! The modified Bessel function of the first kind is evaluated in its
//! exponentially scaled form `ln(e^{-z} I_j(z))`, which stays O(ln z) for
//! every argument we care about. Three regimes are used:
//!
//! * power series for small arguments and low orders,
//! * the uniform (Debye) asymptotic expansion for orders `>= DEBYE_MIN_ORDER`,
//! * backward recurrence seeded from two Debye values for low orders at large
//!   arguments. Downward recurrence is the stable direction for `I`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural logarithm of a nonnegative real. Zero maps to `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a log-magnitude. NaN and `+inf` are rejected.
    pub fn new(log_magnitude: f64) -> Result<Self> {
        if log_magnitude.is_nan() || log_magnitude == f64::INFINITY {
            return Err(Error::domain(format!(
                "log-magnitude must be finite or -inf, got {log_magnitude}"
            )));
        }
        Ok(LogValue(log_magnitude))
    }

    pub fn from_linear(x: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("expected a finite value >= 0, got {x}")));
        }
        Ok(LogValue(x.ln()))
    }

    pub(crate) const fn raw(log_magnitude: f64) -> Self {
        LogValue(log_magnitude)
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    /// Base-2 logarithm of the represented value.
    #[inline]
    pub fn log2(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Product of the represented values.
    #[inline]
    pub fn mul(self, other: LogValue) -> LogValue {
        LogValue(self.0 + other.0)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

/// `ln(sum_i e^{t_i})` without overflow. Empty input gives `-inf`.
pub fn log_sum_exp(terms: &[LogValue]) -> LogValue {
    let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    let sum: f64 = terms.iter().map(|t| (t.0 - max).exp()).sum();
    LogValue(max + sum.ln())
}

/// Two-term log-add, used by accumulators.
#[inline]
pub fn log_add(a: LogValue, b: LogValue) -> LogValue {
    let (hi, lo) = if a.0 >= b.0 { (a.0, b.0) } else { (b.0, a.0) };
    if hi == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    LogValue(hi + (lo - hi).exp().ln_1p())
}

const EXACT_FACTORIAL_MAX: u64 = 20;

/// `ln(n!)`. Exact integer product up to 20, Stirling series above.
pub fn log_factorial(n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("factorial of negative integer {n}")));
    }
    Ok(log_factorial_u(n as u64))
}

pub(crate) fn log_factorial_u(n: u64) -> f64 {
    if n <= EXACT_FACTORIAL_MAX {
        return ((1..=n).product::<u64>() as f64).ln();
    }
    ln_gamma_large(n as f64 + 1.0)
}

/// Stirling series for `ln Gamma(x)`, accurate to ~1e-16 relative for x > 20.
fn ln_gamma_large(x: f64) -> f64 {
    const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
    // B_{2k} / (2k (2k - 1)) for k = 1..6
    const C: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    for &c in C.iter().rev() {
        corr = corr * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr * inv
}

/// Orders at or above this use the uniform asymptotic expansion directly.
const DEBYE_MIN_ORDER: u64 = 20;
/// Number of correction polynomials `u_1..u_K` kept in the expansion.
const DEBYE_TERMS: usize = 14;
/// Low orders switch from the power series to recurrence above this argument.
const SERIES_MAX_ARG: f64 = 15.0;

/// `ln I_j(z)` for integer order and `z >= 0`. Negative orders use
/// `I_{-j} = I_j`.
///
/// The result is `z + log_bessel_i_scaled(j, z)`; for very large `z` the
/// absolute precision of the returned log is limited by the representation of
/// `z` itself. Use [`log_bessel_i_scaled`] when that matters.
pub fn log_bessel_i(order: i64, z: f64) -> Result<LogValue> {
    let scaled = log_bessel_i_scaled(order, z)?;
    Ok(LogValue(z + scaled.0))
}

/// `ln(e^{-z} I_j(z))`, accurate to ~1e-13 relative in `e^{-z} I_j(z)`.
pub fn log_bessel_i_scaled(order: i64, z: f64) -> Result<LogValue> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::domain(format!(
            "Bessel argument must be finite and >= 0, got {z}"
        )));
    }
    Ok(LogValue(log_ive(order.unsigned_abs(), z)))
}

fn log_ive(order: u64, z: f64) -> f64 {
    if z == 0.0 {
        return if order == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if order >= DEBYE_MIN_ORDER {
        return debye_log_ive(order as f64, z);
    }
    if z <= SERIES_MAX_ARG {
        return series_log_ive(order, z);
    }
    recurrence_log_ive(order, z)
}

fn series_log_ive(order: u64, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let j = order as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + j));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    -z + j * (0.5 * z).ln() - log_factorial_u(order) + sum.ln()
}

fn recurrence_log_ive(order: u64, z: f64) -> f64 {
    let top = DEBYE_MIN_ORDER as f64;
    let log_top = debye_log_ive(top, z);
    // ratio = I_{nu+1} / I_nu, walked down from nu = top
    let mut ratio = (debye_log_ive(top + 1.0, z) - log_top).exp();
    let mut product = 1.0;
    let mut nu = DEBYE_MIN_ORDER;
    while nu > order {
        ratio = 1.0 / (2.0 * nu as f64 / z + ratio);
        product *= ratio;
        nu -= 1;
    }
    log_top - product.ln()
}

/// Coefficients of the Debye polynomials `u_k(t)` in ascending powers of t.
fn debye_polynomials() -> &'static [Vec<f64>] {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        // u_{k+1}(t) = t^2 (1 - t^2) u_k'(t) / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds
        let mut polys = vec![vec![1.0]];
        for k in 0..DEBYE_TERMS {
            let prev = &polys[k];
            let mut next = vec![0.0; prev.len() + 3];
            for (i, &c) in prev.iter().enumerate() {
                let fi = i as f64;
                next[i + 1] += 0.5 * fi * c + c / (8.0 * (fi + 1.0));
                next[i + 3] += -0.5 * fi * c - 5.0 * c / (8.0 * (fi + 3.0));
            }
            polys.push(next);
        }
        polys
    })
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn debye_log_ive(nu: f64, z: f64) -> f64 {
    let x = z / nu;
    let s = x.hypot(1.0);
    let t = 1.0 / s;
    // eta(x) - x with eta = s + ln(x / (1 + s))
    let log_term = if x < 1.0 {
        (1.0 + s).ln() - x.ln()
    } else {
        (1.0 / x).asinh()
    };
    let exponent = nu * (1.0 / (s + x) - log_term);

    let mut correction = 0.0;
    let mut inv_pow = 1.0;
    for poly in debye_polynomials() {
        correction += horner(poly, t) * inv_pow;
        inv_pow /= nu;
    }

    exponent - 0.5 * (2.0 * std::f64::consts::PI * nu).ln() - 0.5 * s.ln() + correction.ln()
}
