//! Scalar and multichannel time series containers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Synthetic,
    File,
}

/// Uniformly sampled scalar series. Values are always finite and non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    dt: f64,
    origin: Origin,
    /// Optional per-sample labels carried through from input files (e.g. anomaly flags).
    labels: Option<Vec<bool>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dt: f64, origin: Origin) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SeriesTooShort { needed: 1, got: 0 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", "must be finite and positive"));
        }
        Ok(Self { values, dt, origin, labels: None })
    }

    /// Synthetic series with unit step.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1.0, Origin::Synthetic)
    }

    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != self.values.len() {
            return Err(Error::LengthMismatch { expected: self.values.len(), got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    /// Applies `f` to every value, keeping metadata.
    pub fn map(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        let mut out = Self::new(values, self.dt, self.origin)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    pub fn truncated(&self, len: usize) -> Result<Self> {
        let len = len.min(self.len());
        let mut out = Self::new(self.values[..len].to_vec(), self.dt, self.origin)?;
        out.labels = self.labels.as_ref().map(|l| l[..len].to_vec());
        Ok(out)
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        std_dev(&self.values)
    }
}

/// The inverse of a z-score normalization: `raw = offset + scale * normalized`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub offset: f64,
    pub scale: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine { offset: 0.0, scale: 1.0 };

    pub fn apply(&self, normalized: f64) -> f64 {
        self.offset + self.scale * normalized
    }

    pub fn invert(&self, raw: f64) -> f64 {
        (raw - self.offset) / self.scale
    }
}

/// Z-scores a series. A constant series maps to all zeros with `scale = 1`.
pub fn normalize(series: &TimeSeries) -> (TimeSeries, Affine) {
    let offset = series.mean();
    let sd = series.std();
    let scale = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
    let affine = Affine { offset, scale };
    let out = series.map(|_, v| affine.invert(v)).expect("z-scoring preserves finiteness");
    (out, affine)
}

pub fn denormalize(series: &TimeSeries, affine: Affine) -> Result<TimeSeries> {
    series.map(|_, v| affine.apply(v))
}

/// Channel-major multichannel series; every channel has the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    channels: Vec<Vec<f64>>,
    len: usize,
}

impl MultiSeries {
    pub fn new(channels: Vec<Vec<f64>>) -> Result<Self> {
        let len = channels.first().map_or(0, Vec::len);
        for ch in &channels {
            if ch.len() != len {
                return Err(Error::LengthMismatch { expected: len, got: ch.len() });
            }
        }
        Ok(Self { channels, len })
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All channel values at time `t`.
    pub fn row(&self, t: usize) -> Vec<f64> {
        self.channels.iter().map(|c| c[t]).collect()
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}
