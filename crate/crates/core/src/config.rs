//! TOML run configuration and named hardware presets.
//!
//! ```toml
//! [detector]
//! response_time_tau = 1e-9
//! max_frequency_nu_m = 5e9
//! power_p = 1e-4
//! center_frequency_nu = 1.934e14
//!
//! [lo]
//! mean_photons_mu = 50.0
//!
//! [adc]
//! interval_a = 1.0
//! gain_k = 1.0
//! bit_depth = 16
//! # input_range = [-32768.0, 32767.0]
//!
//! [numerics]
//! window_epsilon = 1e-12
//! ```
//!
//! Built-in presets live in `presets/presets.toml`. Setting
//! `SHOTQRNG_PRESET_DIR` to a directory containing a `presets.toml` adds to
//! (and overrides entries of) the built-in set.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::DetectorParams;
use crate::dist::{LoParams, DEFAULT_WINDOW_EPSILON};
use crate::entropy::AdcParams;
use crate::error::{Error, Result};

pub const PRESET_DIR_ENV: &str = "SHOTQRNG_PRESET_DIR";

const BUILTIN_PRESETS: &str = include_str!("../presets/presets.toml");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdcConfig {
    pub interval_a: f64,
    pub gain_k: f64,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u32,
    /// Defaults to the symmetric range of the bit depth.
    #[serde(default)]
    pub input_range: Option<(f64, f64)>,
    #[serde(default)]
    pub offset: f64,
}

fn default_bit_depth() -> u32 {
    16
}

impl AdcConfig {
    pub fn to_params(&self) -> Result<AdcParams> {
        let base = match self.input_range {
            Some(range) => AdcParams::new(self.interval_a, self.gain_k, self.bit_depth, range)?,
            None => AdcParams::symmetric(self.interval_a, self.gain_k, self.bit_depth)?,
        };
        base.with_offset(self.offset)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default)]
    pub window_epsilon: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub detector: Option<DetectorParams>,
    #[serde(default)]
    pub lo: Option<LoParams>,
    #[serde(default)]
    pub adc: Option<AdcConfig>,
    #[serde(default)]
    pub numerics: Option<NumericsConfig>,
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::config(format!("{origin}: {}", e.message())))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse_toml(text, "config")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_toml(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// `self` layered over `base`: detector fields merge one by one, other
    /// sections are replaced whole.
    pub fn over(self, base: RunConfig) -> RunConfig {
        let detector = match (self.detector, base.detector) {
            (Some(top), Some(bottom)) => Some(DetectorParams {
                response_time_tau: top.response_time_tau.or(bottom.response_time_tau),
                max_frequency_nu_m: top.max_frequency_nu_m.or(bottom.max_frequency_nu_m),
                power_p: top.power_p.or(bottom.power_p),
                center_frequency_nu: top.center_frequency_nu.or(bottom.center_frequency_nu),
                sampling_frequency_f: top.sampling_frequency_f.or(bottom.sampling_frequency_f),
            }),
            (top, bottom) => top.or(bottom),
        };
        RunConfig {
            description: self.description.or(base.description),
            detector,
            lo: self.lo.or(base.lo),
            adc: self.adc.or(base.adc),
            numerics: self.numerics.or(base.numerics),
        }
    }

    pub fn window_epsilon(&self) -> f64 {
        self.numerics.and_then(|n| n.window_epsilon).unwrap_or(DEFAULT_WINDOW_EPSILON)
    }

    pub fn adc_params(&self) -> Result<Option<AdcParams>> {
        self.adc.as_ref().map(AdcConfig::to_params).transpose()
    }

    /// Per-detector mean photon number: the LO section if present, otherwise
    /// derived from the detector's power and response time.
    pub fn mean_photons_mu(&self) -> Result<f64> {
        if let Some(lo) = self.lo {
            return Ok(lo.mean_photons_mu);
        }
        match &self.detector {
            Some(det) => det.mean_photons_per_detector(),
            None => Err(Error::config("config defines neither [lo] nor [detector]")),
        }
    }
}

/// All presets: built-ins, then entries from `$SHOTQRNG_PRESET_DIR/presets.toml`.
pub fn presets() -> Result<BTreeMap<String, RunConfig>> {
    let mut all: BTreeMap<String, RunConfig> = parse_toml(BUILTIN_PRESETS, "built-in presets")?;
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let path = Path::new(&dir).join("presets.toml");
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let extra: BTreeMap<String, RunConfig> = parse_toml(&text, &path.display().to_string())?;
        all.extend(extra);
    }
    Ok(all)
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let mut all = presets()?;
    all.remove(name).ok_or_else(|| {
        let known: Vec<_> = all.keys().map(String::as_str).collect();
        Error::config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::total_rates;

    #[test]
    fn builtin_presets_parse_and_evaluate() {
        let all = presets().unwrap();
        assert!(all.len() >= 3);
        for (name, cfg) in &all {
            let adc = cfg.adc_params().unwrap().unwrap();
            let det = cfg.detector.unwrap();
            let report = total_rates(&det, &adc, cfg.window_epsilon()).unwrap();
            assert!(report.is_ordered(), "{name}");
            assert!(report.rate_lower_bps.unwrap() > 0.0, "{name}");
        }
    }

    #[test]
    fn unknown_preset_and_keys_are_config_errors() {
        assert!(matches!(preset("no_such_thing"), Err(Error::Config(_))));
        let bad = "[detector]\nresponse_time = 1e-9\n";
        assert!(matches!(RunConfig::from_toml_str(bad), Err(Error::Config(_))));
    }

    #[test]
    fn layering_and_round_trip() {
        let base = preset("balanced_receiver").unwrap();
        let top = RunConfig::from_toml_str("[detector]\npower_p = 2e-4\n[lo]\nmean_photons_mu = 5.0\n").unwrap();
        let cfg = top.over(base.clone());
        let det = cfg.detector.unwrap();
        assert_eq!(det.power_p, Some(2e-4));
        assert_eq!(det.response_time_tau, base.detector.unwrap().response_time_tau);
        assert_eq!(cfg.mean_photons_mu().unwrap(), 5.0);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn adc_defaults() {
        let cfg = RunConfig::from_toml_str("[adc]\ninterval_a = 2.0\ngain_k = 0.5\n").unwrap();
        let adc = cfg.adc_params().unwrap().unwrap();
        assert_eq!(adc, AdcParams::symmetric(2.0, 0.5, 16).unwrap());
        assert_eq!(cfg.window_epsilon(), DEFAULT_WINDOW_EPSILON);
        assert!(matches!(cfg.mean_photons_mu(), Err(Error::Config(_))));
    }
}
