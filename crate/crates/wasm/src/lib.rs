//! Browser bindings for the interactive demo in `www/`.
//!
//! Each exported function returns a JSON string; the `*_data` functions
//! behind them are plain Rust so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use shotqrng::bounds::{log_grid, per_sample_sweep, rate_vs_response_time, RatePoint};
use shotqrng::dist::{gaussian_comparison, DEFAULT_WINDOW_EPSILON};
use shotqrng::entropy::AdcParams;

/// Upper limit on sweep points, to keep the page responsive.
pub const MAX_POINTS: usize = 2000;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Serialize)]
pub struct GaussianView {
    pub mu: f64,
    pub j: Vec<i64>,
    pub skellam: Vec<f64>,
    pub gaussian: Vec<f64>,
    pub max_abs_gap: f64,
    pub total_variation: f64,
}

#[derive(Debug, Serialize)]
pub struct CurvesView {
    pub a_over_k: f64,
    pub mu: Vec<f64>,
    pub r0: Vec<f64>,
    pub r1: Vec<f64>,
    pub r_upper: Vec<f64>,
    pub r_lower: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct RateView {
    pub a_over_k: f64,
    pub frequency_hz: f64,
    pub points: Vec<RatePoint>,
    /// Index of the largest rate on the grid.
    pub peak_index: usize,
}

fn check_points(points: usize) -> Result<(), String> {
    if points < 2 || points > MAX_POINTS {
        return Err(format!("points must lie in 2..={MAX_POINTS}, got {points}"));
    }
    Ok(())
}

pub fn skellam_vs_gaussian_data(mu: f64) -> Result<GaussianView, String> {
    let cmp = gaussian_comparison(mu, DEFAULT_WINDOW_EPSILON).map_err(|e| e.to_string())?;
    Ok(GaussianView {
        mu,
        j: cmp.rows.iter().map(|r| r.0).collect(),
        skellam: cmp.rows.iter().map(|r| r.1).collect(),
        gaussian: cmp.rows.iter().map(|r| r.2).collect(),
        max_abs_gap: cmp.max_abs_gap,
        total_variation: cmp.total_variation,
    })
}

pub fn randomness_curves_data(mu_min: f64, mu_max: f64, points: usize, a_over_k: f64) -> Result<CurvesView, String> {
    check_points(points)?;
    let run = || -> shotqrng::Result<CurvesView> {
        let mus = log_grid(mu_min, mu_max, points)?;
        let adc = AdcParams::with_resolution(a_over_k)?;
        let reports = per_sample_sweep(&mus, &adc, DEFAULT_WINDOW_EPSILON)?;
        Ok(CurvesView {
            a_over_k,
            mu: mus,
            r0: reports.iter().map(|r| r.r0_bits).collect(),
            r1: reports.iter().map(|r| r.r1_bits).collect(),
            r_upper: reports.iter().map(|r| r.r_upper_bits).collect(),
            r_lower: reports.iter().map(|r| r.r_lower_bits).collect(),
        })
    };
    run().map_err(|e| e.to_string())
}

pub fn rate_vs_tau_data(
    power_w: f64,
    wavelength_nm: f64,
    a_over_k: f64,
    tau_min: f64,
    tau_max: f64,
    points: usize,
) -> Result<RateView, String> {
    check_points(points)?;
    if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
        return Err(format!("wavelength must be > 0, got {wavelength_nm}"));
    }
    let frequency_hz = SPEED_OF_LIGHT / (wavelength_nm * 1e-9);
    let run = || -> shotqrng::Result<Vec<RatePoint>> {
        let taus = log_grid(tau_min, tau_max, points)?;
        let adc = AdcParams::with_resolution(a_over_k)?;
        rate_vs_response_time(power_w, frequency_hz, &taus, &adc, DEFAULT_WINDOW_EPSILON)
    };
    let points = run().map_err(|e| e.to_string())?;
    let peak_index = points
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p.rate_lower_bps > points[best].rate_lower_bps { i } else { best });
    Ok(RateView { a_over_k, frequency_hz, points, peak_index })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Skellam(`mu`) pmf next to the normal density of variance `2 mu`.
#[wasm_bindgen]
pub fn skellam_vs_gaussian(mu: f64) -> Result<String, JsError> {
    to_js(skellam_vs_gaussian_data(mu))
}

/// `R0`, `R1`, `R^U` and `R^L` over a log grid of `mu`.
#[wasm_bindgen]
pub fn randomness_curves(mu_min: f64, mu_max: f64, points: usize, a_over_k: f64) -> Result<String, JsError> {
    to_js(randomness_curves_data(mu_min, mu_max, points, a_over_k))
}

/// Lower-bound rate `R^L / tau` over a log grid of response times.
#[wasm_bindgen]
pub fn rate_vs_tau(
    power_w: f64,
    wavelength_nm: f64,
    a_over_k: f64,
    tau_min: f64,
    tau_max: f64,
    points: usize,
) -> Result<String, JsError> {
    to_js(rate_vs_tau_data(power_w, wavelength_nm, a_over_k, tau_min, tau_max, points))
}
