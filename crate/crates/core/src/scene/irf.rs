use std::path::Path;

use crate::error::{Error, Result};

/// Per-wavelength instrument response functions.
///
/// Channel `l` holds `g_l(τ)` for offsets `τ = 0..T`; each channel is
/// non-negative and sums to one. Channels are stored independently since
/// their shapes differ between wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Irf {
    channels: Vec<Vec<f64>>,
    bin_width: f64,
}

impl Irf {
    /// Validates and renormalizes raw channels.
    pub fn new(channels: Vec<Vec<f64>>, bin_width: f64) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::malformed("IRF", "no channels"));
        }
        let bins = channels[0].len();
        if bins == 0 {
            return Err(Error::malformed("IRF", "zero-length channel"));
        }
        if !(bin_width > 0.0) {
            return Err(Error::invalid("bin_width", format!("{bin_width} must be positive")));
        }
        let mut channels = channels;
        for (l, ch) in channels.iter_mut().enumerate() {
            if ch.len() != bins {
                return Err(Error::malformed(
                    "IRF",
                    format!("channel {l} has {} bins, expected {bins}", ch.len()),
                ));
            }
            for (t, &v) in ch.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeIrfSample { channel: l, bin: t, value: v });
                }
            }
            let sum: f64 = ch.iter().sum();
            if sum <= 0.0 {
                return Err(Error::ZeroIrfChannel { channel: l });
            }
            ch.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Irf { channels, bin_width })
    }

    /// Discretized Gaussian pulses, one per `(sigma, center)` pair, in bins.
    pub fn gaussian(bins: usize, shapes: &[(f64, f64)], bin_width: f64) -> Result<Self> {
        let channels = shapes
            .iter()
            .map(|&(sigma, center)| {
                (0..bins)
                    .map(|t| {
                        let z = (t as f64 - center) / sigma;
                        (-0.5 * z * z).exp()
                    })
                    .collect()
            })
            .collect();
        Irf::new(channels, bin_width)
    }

    /// Unit impulse at offset zero on every channel.
    pub fn delta(bins: usize, wavelengths: usize, bin_width: f64) -> Self {
        let mut ch = vec![0.0; bins];
        ch[0] = 1.0;
        Irf { channels: vec![ch; wavelengths], bin_width }
    }

    /// Reads `bins` rows of whitespace-separated columns, one column per
    /// wavelength. Lines starting with `#` are ignored.
    pub fn load(path: impl AsRef<Path>, bins: usize, bin_width: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, bins, bin_width)
    }

    pub fn parse(text: &str, bins: usize, bin_width: f64) -> Result<Self> {
        let mut columns: Vec<Vec<f64>> = Vec::new();
        let mut rows = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::malformed("IRF", format!("line {}: cannot parse `{tok}`", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if columns.is_empty() {
                columns = vec![Vec::with_capacity(bins); values.len()];
            } else if values.len() != columns.len() {
                return Err(Error::malformed(
                    "IRF",
                    format!("line {}: {} columns, expected {}", lineno + 1, values.len(), columns.len()),
                ));
            }
            for (col, v) in columns.iter_mut().zip(values) {
                col.push(v);
            }
            rows += 1;
        }
        if rows != bins {
            return Err(Error::malformed("IRF", format!("{rows} rows, expected {bins}")));
        }
        Irf::new(columns, bin_width)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in 0..self.bins() {
            let row: Vec<String> = self.channels.iter().map(|ch| format!("{:e}", ch[t])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn bins(&self) -> usize {
        self.channels[0].len()
    }

    pub fn wavelengths(&self) -> usize {
        self.channels.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn channel(&self, l: usize) -> &[f64] {
        &self.channels[l]
    }

    /// `g_l(τ)` with zero outside `[0, T)`.
    #[inline]
    pub fn value(&self, l: usize, offset: isize) -> f64 {
        if offset < 0 {
            0.0
        } else {
            self.channels[l].get(offset as usize).copied().unwrap_or(0.0)
        }
    }

    /// Last offset at which any channel is non-negligible (`> tol`).
    pub fn support_end(&self, tol: f64) -> usize {
        self.channels
            .iter()
            .map(|ch| ch.iter().rposition(|&v| v > tol).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}
