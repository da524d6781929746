//! Step-forward population encoder and sliding-window spike decoders.
//!
//! The encoder keeps one baseline per threshold level. Level `k` uses the
//! threshold `sf_threshold * ratio^k` and owns two channels: an up channel
//! at index `k` and a down channel at index `levels + k`.

use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{MultiSeries, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncoderConfig {
    pub channels: usize,
    pub sf_threshold: f64,
    pub ratio: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        // Thresholds 0.1, 0.2, 0.4, 0.8 on a unit-variance signal.
        Self { channels: 8, sf_threshold: 0.1, ratio: 2.0 }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels < 2 || !self.channels.is_multiple_of(2) {
            return Err(Error::invalid("channels", "must be even and >= 2"));
        }
        if !(self.sf_threshold.is_finite() && self.sf_threshold > 0.0) {
            return Err(Error::invalid("sf_threshold", "must be positive"));
        }
        if !(self.ratio.is_finite() && self.ratio >= 1.0) {
            return Err(Error::invalid("ratio", "must be >= 1"));
        }
        Ok(())
    }

    pub fn levels(&self) -> usize {
        self.channels / 2
    }

    pub fn threshold(&self, level: usize) -> f64 {
        self.sf_threshold * self.ratio.powi(level as i32)
    }

    /// Up channel index of `level`; the matching down channel is `levels() + level`.
    pub fn up_channel(&self, level: usize) -> usize {
        level
    }

    pub fn down_channel(&self, level: usize) -> usize {
        self.levels() + level
    }
}

/// Streaming step-forward encoder. The first sample initialises the
/// baselines and never spikes.
#[derive(Debug, Clone)]
pub struct StepForwardEncoder {
    cfg: EncoderConfig,
    baselines: Option<Vec<f64>>,
}

impl StepForwardEncoder {
    pub fn new(cfg: EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, baselines: None })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn baselines(&self) -> Option<&[f64]> {
        self.baselines.as_deref()
    }

    /// Encodes one sample into a per-channel spike vector.
    pub fn push(&mut self, x: f64) -> Vec<bool> {
        let levels = self.cfg.levels();
        let mut spikes = vec![false; self.cfg.channels];
        let Some(bases) = self.baselines.as_mut() else {
            self.baselines = Some(vec![x; levels]);
            return spikes;
        };
        for (k, base) in bases.iter_mut().enumerate() {
            let th = self.cfg.threshold(k);
            let tol = 1e-9 * th;
            if x >= *base + th - tol {
                spikes[k] = true;
                *base += th;
            } else if x <= *base - th + tol {
                spikes[levels + k] = true;
                *base -= th;
            }
        }
        spikes
    }
}

/// Upper bound on the channel count accepted from CSV input.
pub const MAX_CHANNELS: usize = 1 << 20;

/// Per-channel spike steps over a fixed horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeRaster {
    events: Vec<Vec<usize>>,
    horizon: usize,
}

impl SpikeRaster {
    pub fn new(events: Vec<Vec<usize>>, horizon: usize) -> Result<Self> {
        for ch in &events {
            if ch.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("raster", "spike steps must be strictly increasing"));
            }
            if let Some(&last) = ch.last() {
                if last >= horizon {
                    return Err(Error::OutOfRange { index: last, limit: horizon });
                }
            }
        }
        Ok(Self { events, horizon })
    }

    pub fn empty(channels: usize, horizon: usize) -> Self {
        Self { events: vec![Vec::new(); channels], horizon }
    }

    /// Builds a raster from a step-major boolean matrix.
    pub fn from_steps(steps: &[Vec<bool>], channels: usize) -> Self {
        let mut events = vec![Vec::new(); channels];
        for (t, row) in steps.iter().enumerate() {
            for (c, &s) in row.iter().enumerate().take(channels) {
                if s {
                    events[c].push(t);
                }
            }
        }
        Self { events, horizon: steps.len() }
    }

    pub fn events(&self) -> &[Vec<usize>] {
        &self.events
    }

    pub fn channel(&self, c: usize) -> &[usize] {
        &self.events[c]
    }

    pub fn n_channels(&self) -> usize {
        self.events.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn spike_count(&self) -> usize {
        self.events.iter().map(Vec::len).sum()
    }

    /// Step-major dense view.
    pub fn to_steps(&self) -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; self.events.len()]; self.horizon];
        for (c, ch) in self.events.iter().enumerate() {
            for &t in ch {
                out[t][c] = true;
            }
        }
        out
    }

    pub fn truncated(&self, horizon: usize) -> Self {
        let horizon = horizon.min(self.horizon);
        let events = self.events.iter().map(|ch| ch.iter().copied().filter(|&t| t < horizon).collect()).collect();
        Self { events, horizon }
    }

    /// Writes `channel,step` rows sorted by channel then step.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["channel", "step"])?;
        for (c, ch) in self.events.iter().enumerate() {
            for &t in ch {
                wtr.write_record([c.to_string(), t.to_string()])?;
            }
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Parses the `channel,step` event list. Channel count and horizon are
    /// taken from the largest indices seen unless given explicitly.
    pub fn read_csv<R: Read>(r: R, channels: Option<usize>, horizon: Option<usize>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["channel", "step"] {
            return Err(Error::Csv("expected header `channel,step`".into()));
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.position().map_or(0, |p| p.line());
            let parse = |i: usize| -> Result<usize> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Row { row, reason: "expected a non-negative integer".into() })
            };
            pairs.push((parse(0)?, parse(1)?));
        }
        if pairs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Csv("events must be sorted by (channel, step) without duplicates".into()));
        }
        let n_ch = channels.unwrap_or_else(|| pairs.iter().map(|p| p.0.saturating_add(1)).max().unwrap_or(0));
        if n_ch > MAX_CHANNELS {
            return Err(Error::OutOfRange { index: n_ch, limit: MAX_CHANNELS });
        }
        let hz = match horizon {
            Some(h) => h,
            None => match pairs.iter().map(|p| p.1).max() {
                Some(t) => t.checked_add(1).ok_or(Error::OutOfRange { index: t, limit: usize::MAX - 1 })?,
                None => 0,
            },
        };
        let mut events = vec![Vec::new(); n_ch];
        for (c, t) in pairs {
            if c >= n_ch {
                return Err(Error::OutOfRange { index: c, limit: n_ch });
            }
            events[c].push(t);
        }
        Self::new(events, hz)
    }
}

/// Batch step-forward encoding of a whole series.
pub fn encode(series: &TimeSeries, cfg: &EncoderConfig) -> Result<SpikeRaster> {
    let mut enc = StepForwardEncoder::new(*cfg)?;
    let steps: Vec<Vec<bool>> = series.values().iter().map(|&x| enc.push(x)).collect();
    Ok(SpikeRaster::from_steps(&steps, cfg.channels))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoderConfig {
    pub tau: usize,
    pub gamma: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { tau: 30, gamma: 0.924 }
    }
}

impl DecoderConfig {
    pub fn new(tau: usize, gamma: f64) -> Result<Self> {
        let cfg = Self { tau, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=50).contains(&self.tau) {
            return Err(Error::invalid("tau", "must be in 1..=50"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid("gamma", "must be in (0, 1]"));
        }
        if self.gamma.powi(self.tau as i32 - 1) < 0.1 {
            return Err(Error::invalid("gamma", "gamma^(tau-1) must be >= 0.1"));
        }
        Ok(())
    }

    /// Largest value a single channel can reach.
    pub fn max_rate(&self) -> f64 {
        (0..=self.tau).map(|n| self.gamma.powi(n as i32)).sum()
    }
}

/// `r(t) = sum_{n=0..=tau} gamma^n s(t - n)` for every channel of the raster.
pub fn decode(raster: &SpikeRaster, cfg: &DecoderConfig) -> Result<MultiSeries> {
    cfg.validate()?;
    let weights: Vec<f64> = (0..=cfg.tau).map(|n| cfg.gamma.powi(n as i32)).collect();
    let channels = raster
        .events()
        .iter()
        .map(|ch| {
            let mut out = vec![0.0; raster.horizon()];
            for &t in ch {
                for (n, w) in weights.iter().enumerate() {
                    if let Some(slot) = out.get_mut(t + n) {
                        *slot += w;
                    }
                }
            }
            out
        })
        .collect();
    MultiSeries::new(channels)
}

/// Streaming form of [`decode`].
#[derive(Debug, Clone)]
pub struct RateDecoder {
    weights: Vec<f64>,
    history: VecDeque<Vec<bool>>,
}

impl RateDecoder {
    pub fn new(cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = (0..=cfg.tau).map(|n| cfg.gamma.powi(n as i32)).collect();
        Ok(Self { weights, history: VecDeque::with_capacity(cfg.tau + 1) })
    }

    pub fn push(&mut self, spikes: &[bool]) -> Vec<f64> {
        if self.history.len() == self.weights.len() {
            self.history.pop_back();
        }
        self.history.push_front(spikes.to_vec());
        let mut out = vec![0.0; spikes.len()];
        for (w, row) in self.weights.iter().zip(&self.history) {
            for (o, &s) in out.iter_mut().zip(row) {
                if s {
                    *o += w;
                }
            }
        }
        out
    }
}

/// Membrane traces as channels, in the given order. With `zscore`, each
/// channel is standardised; constant channels become zeros.
pub fn decode_membrane(traces: &[Vec<f64>], zscore: bool) -> Result<MultiSeries> {
    let mut channels = traces.to_vec();
    if zscore {
        for ch in &mut channels {
            let m = crate::series::mean(ch);
            let sd = crate::series::std_dev(ch);
            let scale = if sd > 0.0 { sd } else { 1.0 };
            for v in ch.iter_mut() {
                *v = (*v - m) / scale;
            }
        }
    }
    MultiSeries::new(channels)
}
