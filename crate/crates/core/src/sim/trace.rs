//! Raw ADC traces and their on-disk layouts.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! magic        4 bytes  "SQRT"
//! version      u16      1
//! bit_depth    u8
//! code_width   u8       bytes per code: 1, 2 or 4
//! interval_a   f64
//! gain_k       f64
//! range_lo     f64
//! range_hi     f64
//! offset       f64
//! sample_rate  f64      Hz
//! has_seed     u8
//! seed         u64
//! tag_len      u16
//! tag          tag_len bytes, UTF-8
//! count        u64
//! codes        count * code_width bytes, unsigned
//! ```
//!
//! The CSV layout carries the same metadata as `# key=value` comment lines,
//! followed by a `code` header and one unsigned code per line.

use std::io::{BufRead, Read, Write};

use crate::entropy::AdcParams;
use crate::error::{Error, Result};

pub const TRACE_MAGIC: &[u8; 4] = b"SQRT";
pub const TRACE_VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct RawTrace {
    /// Unsigned ADC codes, `0 ..= 2^bit_depth - 1`.
    pub samples: Vec<u32>,
    pub adc: AdcParams,
    pub sample_rate_hz: f64,
    pub seed: Option<u64>,
    pub source_tag: String,
}

impl RawTrace {
    pub fn new(samples: Vec<u32>, adc: AdcParams, sample_rate_hz: f64, seed: Option<u64>, source_tag: impl Into<String>) -> Result<Self> {
        let trace = RawTrace { samples, adc, sample_rate_hz, seed, source_tag: source_tag.into() };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        self.adc.validate()?;
        let (lo, hi) = self.adc.code_bounds();
        let max = (hi - lo) as u64;
        if let Some(bad) = self.samples.iter().find(|&&c| c as u64 > max) {
            return Err(Error::domain(format!("code {bad} exceeds the ADC range 0..={max}")));
        }
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return Err(Error::domain(format!("sample rate must be > 0, got {}", self.sample_rate_hz)));
        }
        if self.source_tag.len() > u16::MAX as usize {
            return Err(Error::domain("source tag too long"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Signed codes, zero at the bin holding zero photons (for zero offset).
    pub fn signed_codes(&self) -> impl Iterator<Item = i64> + '_ {
        let lo = self.adc.code_bounds().0;
        self.samples.iter().map(move |&c| c as i64 + lo)
    }

    fn code_width(&self) -> u8 {
        match self.adc.bit_depth {
            0..=8 => 1,
            9..=16 => 2,
            _ => 4,
        }
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        self.validate()?;
        let width = self.code_width();
        out.write_all(TRACE_MAGIC)?;
        out.write_all(&TRACE_VERSION.to_le_bytes())?;
        out.write_all(&[self.adc.bit_depth as u8, width])?;
        for v in [
            self.adc.interval_a,
            self.adc.gain_k,
            self.adc.input_range.0,
            self.adc.input_range.1,
            self.adc.offset,
            self.sample_rate_hz,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&[self.seed.is_some() as u8])?;
        out.write_all(&self.seed.unwrap_or(0).to_le_bytes())?;
        out.write_all(&(self.source_tag.len() as u16).to_le_bytes())?;
        out.write_all(self.source_tag.as_bytes())?;
        out.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.samples.len() * width as usize);
        for &c in &self.samples {
            match width {
                1 => buf.push(c as u8),
                2 => buf.extend_from_slice(&(c as u16).to_le_bytes()),
                _ => buf.extend_from_slice(&c.to_le_bytes()),
            }
        }
        out.write_all(&buf)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != TRACE_MAGIC {
            return Err(Error::format("not a trace file (bad magic)"));
        }
        let version = u16::from_le_bytes(read_array(&mut input)?);
        if version != TRACE_VERSION {
            return Err(Error::format(format!("unsupported trace version {version}")));
        }
        let [bit_depth, width] = read_array::<2>(&mut input)?;
        let mut f = [0.0f64; 6];
        for v in &mut f {
            *v = f64::from_le_bytes(read_array(&mut input)?);
        }
        let [has_seed] = read_array::<1>(&mut input)?;
        let seed = u64::from_le_bytes(read_array(&mut input)?);
        let tag_len = u16::from_le_bytes(read_array(&mut input)?) as usize;
        let mut tag = vec![0u8; tag_len];
        input.read_exact(&mut tag)?;
        let source_tag = String::from_utf8(tag).map_err(|_| Error::format("source tag is not UTF-8"))?;
        let count = u64::from_le_bytes(read_array(&mut input)?) as usize;
        if !matches!(width, 1 | 2 | 4) {
            return Err(Error::format(format!("bad code width {width}")));
        }
        let mut raw = Vec::new();
        input.read_to_end(&mut raw)?;
        if raw.len() != count * width as usize {
            return Err(Error::format(format!(
                "expected {count} codes of {width} bytes, found {} bytes",
                raw.len()
            )));
        }
        let samples = match width {
            1 => raw.iter().map(|&b| b as u32).collect(),
            2 => raw.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as u32).collect(),
            _ => raw.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect(),
        };
        let adc = AdcParams {
            interval_a: f[0],
            gain_k: f[1],
            bit_depth: bit_depth as u32,
            input_range: (f[2], f[3]),
            offset: f[4],
        };
        RawTrace::new(samples, adc, f[5], (has_seed != 0).then_some(seed), source_tag)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        self.validate()?;
        let adc = &self.adc;
        writeln!(out, "# shotqrng trace v{TRACE_VERSION}")?;
        writeln!(out, "# bit_depth={}", adc.bit_depth)?;
        writeln!(out, "# interval_a={}", adc.interval_a)?;
        writeln!(out, "# gain_k={}", adc.gain_k)?;
        writeln!(out, "# input_range={},{}", adc.input_range.0, adc.input_range.1)?;
        writeln!(out, "# offset={}", adc.offset)?;
        writeln!(out, "# sample_rate_hz={}", self.sample_rate_hz)?;
        if let Some(seed) = self.seed {
            writeln!(out, "# seed={seed}")?;
        }
        writeln!(out, "# source_tag={}", self.source_tag.replace('\n', " "))?;
        writeln!(out, "code")?;
        let mut text = String::with_capacity(self.samples.len() * 6);
        for c in &self.samples {
            text.push_str(&c.to_string());
            text.push('\n');
        }
        out.write_all(text.as_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut meta = std::collections::HashMap::new();
        let mut samples = Vec::new();
        let mut seen_header = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if !seen_header {
                if line != "code" {
                    return Err(Error::format(format!("line {}: expected `code` header", lineno + 1)));
                }
                seen_header = true;
                continue;
            }
            let code = line
                .parse::<u32>()
                .map_err(|_| Error::format(format!("line {}: bad code `{line}`", lineno + 1)))?;
            samples.push(code);
        }
        let get = |k: &str| -> Result<&String> {
            meta.get(k).ok_or_else(|| Error::format(format!("trace csv missing `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::format(format!("trace csv: bad value for `{k}`")))
        };
        let (lo, hi) = get("input_range")?
            .split_once(',')
            .ok_or_else(|| Error::format("trace csv: input_range needs two values"))?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::format("trace csv: bad input_range"));
        let adc = AdcParams {
            interval_a: num("interval_a")?,
            gain_k: num("gain_k")?,
            bit_depth: get("bit_depth")?.parse().map_err(|_| Error::format("trace csv: bad bit_depth"))?,
            input_range: (parse(lo)?, parse(hi)?),
            offset: meta.get("offset").map_or(Ok(0.0), |_| num("offset"))?,
        };
        let seed = match meta.get("seed") {
            Some(s) => Some(s.parse().map_err(|_| Error::format("trace csv: bad seed"))?),
            None => None,
        };
        let tag = meta.get("source_tag").cloned().unwrap_or_default();
        RawTrace::new(samples, adc, num("sample_rate_hz")?, seed, tag)
    }
}

fn read_array<const N: usize>(input: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::format("trace file truncated")
        } else {
            Error::Io(e)
        }
    })?;
    Ok(buf)
}
