//! Supervised online baselines: naive persistence and an SGD autoregressor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Repeats the last observation.
pub fn naive_predict(tail: &[f64]) -> Result<f64> {
    tail.last().copied().ok_or(Error::SeriesTooShort { needed: 1, got: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArConfig {
    pub order: usize,
    pub learning_rate: f64,
}

impl Default for ArConfig {
    fn default() -> Self {
        Self { order: 8, learning_rate: 0.01 }
    }
}

/// Linear autoregressor `y(t+1) = w0 + sum_k w_k y(t+1-k)` trained by one SGD
/// step on the squared error of each new observation.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineAr {
    order: usize,
    learning_rate: f64,
    /// `[bias, lag1, ..., lag_p]`
    weights: Vec<f64>,
    /// Most recent observation first.
    lags: Vec<f64>,
    seen: usize,
    pending: Option<(f64, Vec<f64>)>,
    resets: usize,
}

/// Result of feeding one observation to [`OnlineAr::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArStep {
    /// Forecast for the next observation; `None` until `order` lags exist.
    pub prediction: Option<f64>,
    /// True when the weights blew past the divergence bound and were zeroed.
    pub reset: bool,
}

const DIVERGENCE_NORM: f64 = 1e6;

impl OnlineAr {
    pub fn new(cfg: ArConfig) -> Result<Self> {
        if cfg.order == 0 {
            return Err(Error::invalid("order", "must be >= 1"));
        }
        if !(cfg.learning_rate.is_finite() && cfg.learning_rate >= 0.0) {
            return Err(Error::invalid("learning_rate", "must be finite and non-negative"));
        }
        Ok(Self {
            order: cfg.order,
            learning_rate: cfg.learning_rate,
            weights: vec![0.0; cfg.order + 1],
            lags: vec![0.0; cfg.order],
            seen: 0,
            pending: None,
            resets: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, w: Vec<f64>) -> Result<()> {
        if w.len() != self.order + 1 {
            return Err(Error::LengthMismatch { expected: self.order + 1, got: w.len() });
        }
        self.weights = w;
        Ok(())
    }

    pub fn resets(&self) -> usize {
        self.resets
    }

    fn features(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.lags.iter().copied()).collect()
    }

    fn dot(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum()
    }

    /// Learns from `y` (if a forecast for it was outstanding), then forecasts
    /// the next value.
    pub fn step(&mut self, y: f64) -> ArStep {
        let mut reset = false;
        if let Some((pred, x)) = self.pending.take() {
            let err = y - pred;
            for (w, xi) in self.weights.iter_mut().zip(&x) {
                *w += self.learning_rate * err * xi;
            }
            let norm = self.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            if !norm.is_finite() || norm > DIVERGENCE_NORM {
                self.weights.iter_mut().for_each(|w| *w = 0.0);
                self.resets += 1;
                reset = true;
            }
        }
        self.lags.rotate_right(1);
        self.lags[0] = y;
        self.seen += 1;
        if self.seen < self.order {
            return ArStep { prediction: None, reset };
        }
        let x = self.features();
        let pred = self.dot(&x);
        self.pending = Some((pred, x));
        ArStep { prediction: Some(pred), reset }
    }
}
