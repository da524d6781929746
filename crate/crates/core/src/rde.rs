//! Randomly distributed embedding: an ensemble of nearest-neighbour weak
//! predictors, each seeing a random low-dimensional subset of the observed
//! channels, voting on future values of a target series.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MultiSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct DelayEmbedding {
    pub dim: usize,
    pub delay: usize,
    /// `(t, (x(t), x(t - delay), ...))`
    pub vectors: Vec<(usize, Vec<f64>)>,
}

pub fn delay_embed(values: &[f64], dim: usize, delay: usize) -> Result<DelayEmbedding> {
    if dim == 0 || delay == 0 {
        return Err(Error::invalid("embedding", "dimension and delay must be >= 1"));
    }
    let span = (dim - 1) * delay;
    if values.len() < span + 1 {
        return Err(Error::SeriesTooShort { needed: span + 1, got: values.len() });
    }
    let vectors = (span..values.len()).map(|t| (t, (0..dim).map(|k| values[t - k * delay]).collect())).collect();
    Ok(DelayEmbedding { dim, delay, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RdeConfig {
    /// Channels per random embedding; `None` uses `embed_dim`.
    pub subset_size: Option<usize>,
    pub n_embeddings: usize,
    pub embed_dim: usize,
    pub delay: usize,
    pub k_nn: usize,
    pub horizon: usize,
    /// Fraction of votes trimmed from each tail.
    pub trim: f64,
    /// Regulariser in the inverse-error vote weights.
    pub weight_eps: f64,
}

impl Default for RdeConfig {
    fn default() -> Self {
        Self {
            subset_size: None,
            n_embeddings: 100,
            embed_dim: 3,
            delay: 2,
            k_nn: 4,
            horizon: 1,
            trim: 0.1,
            weight_eps: 1e-3,
        }
    }
}

impl RdeConfig {
    pub fn subset_size(&self) -> usize {
        self.subset_size.unwrap_or(self.embed_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subset_size() == 0 {
            return Err(Error::invalid("subset_size", "must be >= 1"));
        }
        if self.n_embeddings == 0 {
            return Err(Error::invalid("n_embeddings", "must be >= 1"));
        }
        if self.embed_dim == 0 || self.delay == 0 {
            return Err(Error::invalid("embed_dim", "embed_dim and delay must be >= 1"));
        }
        if self.k_nn == 0 {
            return Err(Error::invalid("k_nn", "must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        if !(0.0..0.5).contains(&self.trim) {
            return Err(Error::invalid("trim", "must be in [0, 0.5)"));
        }
        if !(self.weight_eps.is_finite() && self.weight_eps > 0.0) {
            return Err(Error::invalid("weight_eps", "must be positive"));
        }
        Ok(())
    }
}

/// One random embedding plus its nearest-neighbour map to future targets.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakPredictor {
    pub channels: Vec<usize>,
    features: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    pub fit_error: f64,
}

impl WeakPredictor {
    pub fn n_pairs(&self) -> usize {
        self.features.len()
    }

    fn project(&self, standardized: &[f64]) -> Vec<f64> {
        self.channels.iter().map(|&c| standardized[c]).collect()
    }

    fn predict_projected(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<f64> {
        knn_predict(&self.features, &self.targets, query, k, exclude)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Inverse-distance weighted k-nearest-neighbour regression. Exact matches
/// (distance zero) take all the weight.
fn knn_predict(features: &[Vec<f64>], targets: &[Vec<f64>], query: &[f64], k: usize, exclude: Option<usize>) -> Vec<f64> {
    let mut dists: Vec<(f64, usize)> = features
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, f)| (sq_dist(f, query), i))
        .collect();
    let k = k.min(dists.len());
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dists.len() {
        dists.select_nth_unstable_by(k - 1, cmp);
        dists.truncate(k);
    }
    dists.sort_by(cmp);
    let h = targets[0].len();
    let mut out = vec![0.0; h];
    let exact: Vec<usize> = dists.iter().filter(|d| d.0 <= 1e-24).map(|d| d.1).collect();
    if !exact.is_empty() {
        for &i in &exact {
            for (o, t) in out.iter_mut().zip(&targets[i]) {
                *o += t / exact.len() as f64;
            }
        }
        return out;
    }
    let mut wsum = 0.0;
    for &(d2, i) in &dists {
        let w = 1.0 / d2.sqrt();
        wsum += w;
        for (o, t) in out.iter_mut().zip(&targets[i]) {
            *o += w * t;
        }
    }
    for o in &mut out {
        *o /= wsum;
    }
    out
}

/// Fitted ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionModel {
    pub predictors: Vec<WeakPredictor>,
    pub horizon: usize,
    k_nn: usize,
    trim: f64,
    weight_eps: f64,
    channel_mean: Vec<f64>,
    channel_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    /// Aggregated forecast for steps `1..=horizon`.
    pub point: Vec<f64>,
    /// Inter-decile range of the votes per step.
    pub spread: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSummary {
    pub channels: Vec<usize>,
    pub fit_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub horizon: usize,
    pub k_nn: usize,
    pub n_channels: usize,
    pub predictors: Vec<PredictorSummary>,
}

impl ReconstructionModel {
    pub fn n_channels(&self) -> usize {
        self.channel_mean.len()
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.channel_mean).zip(&self.channel_scale).map(|((x, m), s)| (x - m) / s).collect()
    }

    /// Each predictor's forecast for `obs` (one value per channel).
    pub fn votes(&self, obs: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.predictors.is_empty() {
            return Err(Error::EmptyModel);
        }
        if obs.len() != self.n_channels() {
            return Err(Error::LengthMismatch { expected: self.n_channels(), got: obs.len() });
        }
        if let Some(index) = obs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let z = self.standardize(obs);
        Ok(self.predictors.iter().map(|p| p.predict_projected(&p.project(&z), self.k_nn, None)).collect())
    }

    pub fn predict(&self, obs: &[f64]) -> Result<Forecast> {
        let votes = self.votes(obs)?;
        let weights: Vec<f64> = self.predictors.iter().map(|p| 1.0 / (p.fit_error + self.weight_eps)).collect();
        let mut point = Vec::with_capacity(self.horizon);
        let mut spread = Vec::with_capacity(self.horizon);
        for h in 0..self.horizon {
            let col: Vec<f64> = votes.iter().map(|v| v[h]).collect();
            point.push(trimmed_weighted_mean(&col, &weights, self.trim));
            spread.push(quantile(&col, 0.9) - quantile(&col, 0.1));
        }
        Ok(Forecast { point, spread })
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            horizon: self.horizon,
            k_nn: self.k_nn,
            n_channels: self.n_channels(),
            predictors: self
                .predictors
                .iter()
                .map(|p| PredictorSummary { channels: p.channels.clone(), fit_error: p.fit_error })
                .collect(),
        }
    }

    /// Ensemble leave-one-out RMSE on the training pairs (first horizon step).
    pub fn loo_rmse(&self) -> f64 {
        let Some(first) = self.predictors.first() else { return f64::NAN };
        let n = first.n_pairs();
        let weights: Vec<f64> = self.predictors.iter().map(|p| 1.0 / (p.fit_error + self.weight_eps)).collect();
        let mut sse = 0.0;
        for i in 0..n {
            let votes: Vec<f64> =
                self.predictors.iter().map(|p| p.predict_projected(&p.features[i], self.k_nn, Some(i))[0]).collect();
            let e = trimmed_weighted_mean(&votes, &weights, self.trim) - first.targets[i][0];
            sse += e * e;
        }
        (sse / n as f64).sqrt()
    }
}

/// Number of votes dropped from each tail: `ceil(trim * n)`, reduced so at
/// least one vote survives.
pub fn trim_count(n: usize, trim: f64) -> usize {
    let k = (trim * n as f64).ceil() as usize;
    k.min(n.saturating_sub(1) / 2)
}

/// Drops `trim_count` of the lowest and highest votes, then takes the
/// weighted mean of the rest.
pub fn trimmed_weighted_mean(values: &[f64], weights: &[f64], trim: f64) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let k = trim_count(values.len(), trim);
    let kept = &idx[k..idx.len() - k];
    let wsum: f64 = kept.iter().map(|&i| weights[i]).sum();
    kept.iter().map(|&i| weights[i] * values[i]).sum::<f64>() / wsum
}

/// Linear-interpolation quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// One-step changes `x(t) - x(t-1)`, with `0` at `t = 0`. Fitting on this
/// target forecasts the next change, which is added back to the last value.
pub fn increments(values: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(values.windows(2).map(|w| w[1] - w[0])).take(values.len()).collect()
}

/// Draws `cfg.n_embeddings` random channel subsets and fits the ensemble.
pub fn fit(obs: &MultiSeries, target: &[f64], cfg: &RdeConfig, seed: u64) -> Result<ReconstructionModel> {
    cfg.validate()?;
    let k = obs.n_channels();
    let s = cfg.subset_size();
    if k < s {
        return Err(Error::InsufficientData(format!("{k} channels for subsets of size {s}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets: Vec<Vec<usize>> = (0..cfg.n_embeddings)
        .map(|_| {
            let mut v = sample(&mut rng, k, s).into_vec();
            v.sort_unstable();
            v
        })
        .collect();
    fit_with_subsets(obs, target, cfg, subsets)
}

/// Fits one weak predictor per given channel subset.
pub fn fit_with_subsets(
    obs: &MultiSeries,
    target: &[f64],
    cfg: &RdeConfig,
    subsets: Vec<Vec<usize>>,
) -> Result<ReconstructionModel> {
    cfg.validate()?;
    if subsets.is_empty() {
        return Err(Error::EmptyModel);
    }
    let k = obs.n_channels();
    for sub in &subsets {
        if sub.is_empty() {
            return Err(Error::invalid("subsets", "must be non-empty"));
        }
        if let Some(&bad) = sub.iter().find(|&&c| c >= k) {
            return Err(Error::OutOfRange { index: bad, limit: k });
        }
    }
    if obs.len() != target.len() {
        return Err(Error::LengthMismatch { expected: obs.len(), got: target.len() });
    }
    let n_pairs = obs.len().saturating_sub(cfg.horizon);
    if n_pairs < cfg.k_nn + 1 {
        return Err(Error::InsufficientData(format!(
            "{n_pairs} training pairs, need at least {}",
            cfg.k_nn + 1
        )));
    }
    if let Some(index) = target.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }

    let mut channel_mean = Vec::with_capacity(k);
    let mut channel_scale = Vec::with_capacity(k);
    for ch in obs.channels() {
        let train = &ch[..n_pairs];
        if let Some(index) = train.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let m = crate::series::mean(train);
        let sd = crate::series::std_dev(train);
        channel_mean.push(m);
        channel_scale.push(if sd > 1e-12 { sd } else { 1.0 });
    }
    let rows: Vec<Vec<f64>> = (0..n_pairs)
        .map(|t| (0..k).map(|c| (obs.channel(c)[t] - channel_mean[c]) / channel_scale[c]).collect())
        .collect();
    let targets: Vec<Vec<f64>> = (0..n_pairs).map(|t| target[t + 1..=t + cfg.horizon].to_vec()).collect();

    let predictors = subsets
        .into_par_iter()
        .map(|channels| {
            let features: Vec<Vec<f64>> = rows.iter().map(|r| channels.iter().map(|&c| r[c]).collect()).collect();
            let mut sse = 0.0;
            for (i, f) in features.iter().enumerate() {
                let e = knn_predict(&features, &targets, f, cfg.k_nn, Some(i))[0] - targets[i][0];
                sse += e * e;
            }
            let fit_error = (sse / n_pairs as f64).sqrt();
            WeakPredictor { channels, features, targets: targets.clone(), fit_error }
        })
        .collect();

    Ok(ReconstructionModel {
        predictors,
        horizon: cfg.horizon,
        k_nn: cfg.k_nn,
        trim: cfg.trim,
        weight_eps: cfg.weight_eps,
        channel_mean,
        channel_scale,
    })
}

/// False-nearest-neighbour estimate of the embedding dimension (unit
/// delay). Returns the smallest `E` whose false-neighbour fraction is below
/// 5%, or `max_e` if none is.
pub fn choose_embedding_dim(values: &[f64], max_e: usize) -> usize {
    const R_TOL: f64 = 10.0;
    const A_TOL: f64 = 2.0;
    let max_e = max_e.max(1);
    let sd = crate::series::std_dev(values);
    if sd == 0.0 {
        return 1;
    }
    for e in 1..max_e {
        // Vectors need one extra future coordinate for the E+1 test.
        let n = values.len().saturating_sub(e);
        if n < 2 {
            return max_e;
        }
        let vec_at = |t: usize| -> Vec<f64> { (0..e).map(|k| values[t + k]).collect() };
        let vectors: Vec<Vec<f64>> = (0..n).map(vec_at).collect();
        let mut false_count = 0usize;
        for i in 0..n {
            let (mut best, mut nn) = (f64::INFINITY, usize::MAX);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = sq_dist(&vectors[i], &vectors[j]);
                if d < best {
                    best = d;
                    nn = j;
                }
            }
            let d_e = best.sqrt();
            let extra = (values[i + e] - values[nn + e]).abs();
            let is_false = if d_e > 0.0 {
                extra / d_e > R_TOL || (best + extra * extra).sqrt() / sd > A_TOL
            } else {
                extra > 0.0
            };
            false_count += is_false as usize;
        }
        if (false_count as f64) < 0.05 * n as f64 {
            return e;
        }
    }
    max_e
}
