//! The online prediction loop and its evaluation.
//!
//! Each incoming sample is spike-encoded and drives one step of the
//! plastic recurrent network. The membrane potentials (or decoded spike
//! rates) of the sampled neurons form the observation vector that the
//! embedding ensemble maps to the next value of the series. A rolling loss
//! between observed and predicted values decides when the ensemble is
//! re-fitted on the trailing buffer.

use std::collections::VecDeque;
use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ArConfig, OnlineAr};
use crate::codec::{DecoderConfig, EncoderConfig, RateDecoder, StepForwardEncoder};
use crate::error::{Error, Result};
use crate::graph::{self, Digraph, Method};
use crate::rde::{self, RdeConfig, ReconstructionModel};
use crate::rsnn::{Network, RsnnConfig};
use crate::series::{mean, std_dev};
use crate::tda::{PersistenceDiagram, TdaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Rmse,
    Wasserstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub kind: LossKind,
    pub window: usize,
    pub threshold: f64,
}

impl LossSpec {
    pub const DEFAULT_WINDOW: usize = 30;
    pub const RMSE_THRESHOLD: f64 = 0.5;
    pub const WASSERSTEIN_THRESHOLD: f64 = 0.3;

    pub fn rmse() -> Self {
        Self { kind: LossKind::Rmse, window: Self::DEFAULT_WINDOW, threshold: Self::RMSE_THRESHOLD }
    }

    pub fn wasserstein() -> Self {
        Self { kind: LossKind::Wasserstein, window: Self::DEFAULT_WINDOW, threshold: Self::WASSERSTEIN_THRESHOLD }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::invalid("window", "must be >= 2"));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::invalid("threshold", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    #[default]
    Membrane,
    Spikes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Top-k neurons by betweenness centrality.
    #[default]
    Betweenness,
    /// `k` neurons drawn uniformly.
    Random,
    /// Every neuron.
    All,
}

/// What the weak predictors regress on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// The next value itself.
    Level,
    /// The next one-step change, added back to the last observation.
    #[default]
    Increment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClursnnConfig {
    pub encoder: EncoderConfig,
    pub rsnn: RsnnConfig,
    pub decoder: DecoderConfig,
    pub readout: Readout,
    pub sampling: Sampling,
    /// Recorded neurons; `None` uses `max(10, n / 50)`.
    pub k: Option<usize>,
    pub rde: RdeConfig,
    pub target: TargetMode,
    /// Trailing samples used for every (re-)fit.
    pub buffer: usize,
    /// Minimum steps between fits; `None` uses the loss window.
    pub cooldown: Option<usize>,
    pub tda: TdaConfig,
}

impl Default for ClursnnConfig {
    fn default() -> Self {
        Self {
            encoder: EncoderConfig::default(),
            rsnn: RsnnConfig::default(),
            decoder: DecoderConfig::default(),
            readout: Readout::Membrane,
            sampling: Sampling::Betweenness,
            k: None,
            rde: RdeConfig::default(),
            target: TargetMode::Increment,
            buffer: 200,
            cooldown: None,
            tda: TdaConfig::default(),
        }
    }
}

impl ClursnnConfig {
    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.rsnn.validate()?;
        self.decoder.validate()?;
        self.rde.validate()?;
        self.tda.validate()?;
        if self.buffer < self.rde.k_nn + self.rde.horizon + 1 {
            return Err(Error::invalid("buffer", "too small for the nearest-neighbour fit"));
        }
        if let Some(k) = self.k {
            if k == 0 || k > self.rsnn.n_neurons {
                return Err(Error::invalid("k", "must be in 1..=n_neurons"));
            }
        }
        if self.cooldown == Some(0) {
            return Err(Error::invalid("cooldown", "must be >= 1"));
        }
        Ok(())
    }

    pub fn recorded_count(&self) -> usize {
        match self.sampling {
            Sampling::All => self.rsnn.n_neurons,
            _ => self.k.unwrap_or_else(|| graph::default_k(self.rsnn.n_neurons)),
        }
    }
}

/// One row of a run record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub observed: f64,
    /// Forecast of `observed` made at `t - 1`.
    pub predicted: Option<f64>,
    pub rmse: Option<f64>,
    pub d_w: Option<f64>,
    /// The ensemble was re-fitted at this step because the loss crossed the threshold.
    pub refit: bool,
    /// The forecast came from the warm-up fallback (naive persistence).
    pub warmup: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub steps: Vec<StepRecord>,
    /// Total ensemble fits, including the initial one.
    pub fits: usize,
    /// Neurons whose activity formed the observation vector.
    pub recorded: Vec<usize>,
}

impl RunRecord {
    pub fn refit_count(&self) -> usize {
        self.steps.iter().filter(|s| s.refit).count()
    }

    pub fn refit_steps(&self) -> Vec<usize> {
        self.steps.iter().filter(|s| s.refit).map(|s| s.t).collect()
    }

    pub fn observed(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.observed).collect()
    }

    /// Writes `t,observed,predicted,rmse,d_w,refit`; undefined cells are empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "observed", "predicted", "rmse", "d_w", "refit"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &self.steps {
            wtr.write_record([
                s.t.to_string(),
                s.observed.to_string(),
                opt(s.predicted),
                opt(s.rmse),
                opt(s.d_w),
                u8::from(s.refit).to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Root mean square error between two equal-length windows.
pub fn rolling_rmse(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(Error::LengthMismatch { expected: observed.len(), got: predicted.len() });
    }
    if observed.is_empty() {
        return Err(Error::SeriesTooShort { needed: 1, got: 0 });
    }
    let sse: f64 = observed.iter().zip(predicted).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok((sse / observed.len() as f64).sqrt())
}

/// Rolling RMSE and Wasserstein tracking shared by every model runner.
struct Monitor {
    window: usize,
    tda: TdaConfig,
    observed: Vec<f64>,
    predicted: Vec<Option<f64>>,
    observed_diagrams: Vec<Option<PersistenceDiagram>>,
}

impl Monitor {
    fn new(window: usize, tda: TdaConfig, capacity: usize) -> Self {
        Self {
            window,
            tda,
            observed: Vec::with_capacity(capacity),
            predicted: Vec::with_capacity(capacity),
            observed_diagrams: Vec::with_capacity(capacity),
        }
    }

    /// Registers `y(t)` with its forecast and returns the window losses
    /// ending at `t`, when every sample in the window has a forecast.
    fn push(&mut self, y: f64, pred: Option<f64>) -> Result<(Option<f64>, Option<f64>)> {
        self.observed.push(y);
        self.predicted.push(pred);
        let t = self.observed.len() - 1;
        let w = self.window;
        if t + 1 < w {
            self.observed_diagrams.push(None);
            return Ok((None, None));
        }
        let obs_win = &self.observed[t + 1 - w..=t];
        let obs_diag = self.tda.window_diagram(obs_win, w).ok();
        self.observed_diagrams.push(obs_diag.clone());
        let pred_win: Option<Vec<f64>> = self.predicted[t + 1 - w..=t].iter().copied().collect();
        let Some(pred_win) = pred_win else { return Ok((None, None)) };
        let rmse = rolling_rmse(obs_win, &pred_win)?;
        let d_w = match (obs_diag, self.tda.window_diagram(&pred_win, w).ok()) {
            (Some(a), Some(b)) => Some(self.tda.diagram_distance(&a, &b)),
            _ => None,
        };
        Ok((Some(rmse), d_w))
    }
}

fn split_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Chooses which neurons to record.
pub fn select_neurons(net: &Network, cfg: &ClursnnConfig, seed: u64) -> Result<Vec<usize>> {
    let n = net.n_neurons();
    let k = cfg.recorded_count();
    match cfg.sampling {
        Sampling::All => Ok((0..n).collect()),
        Sampling::Betweenness => {
            let g = Digraph::from_topology(net.topology());
            let scores = graph::betweenness(&g, Method::auto(n, split_seed(seed, 3)));
            graph::top_k(&scores, k)
        }
        Sampling::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 4));
            let mut ids = sample(&mut rng, n, k).into_vec();
            ids.sort_unstable();
            Ok(ids)
        }
    }
}

/// Runs the spiking-network predictor over `values` (already normalised).
pub fn run_online(values: &[f64], cfg: &ClursnnConfig, loss: &LossSpec, seed: u64) -> Result<RunRecord> {
    cfg.validate()?;
    loss.validate()?;
    let warmup = cfg.buffer + loss.window;
    if values.len() <= warmup {
        return Err(Error::SeriesTooShort { needed: warmup + 1, got: values.len() });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let cooldown = cfg.cooldown.unwrap_or(loss.window);

    let mut encoder = StepForwardEncoder::new(cfg.encoder)?;
    let mut net = Network::new(cfg.rsnn, cfg.encoder.channels, split_seed(seed, 1))?;
    let recorded = select_neurons(&net, cfg, seed)?;
    let mut rate = RateDecoder::new(cfg.decoder)?;
    let mut monitor = Monitor::new(loss.window, cfg.tda, values.len());

    let mut obs_buf: VecDeque<Vec<f64>> = VecDeque::with_capacity(cfg.buffer);
    let mut y_buf: VecDeque<f64> = VecDeque::with_capacity(cfg.buffer);
    let mut model: Option<ReconstructionModel> = None;
    let mut last_fit: Option<usize> = None;
    let mut fits = 0usize;
    let mut pending: Option<(f64, bool)> = None;
    let mut steps = Vec::with_capacity(values.len());

    for (t, &y) in values.iter().enumerate() {
        let spikes = encoder.push(y);
        let current = net.input_current(&spikes);
        let fired = net.step(&current)?;
        let row: Vec<f64> = match cfg.readout {
            Readout::Membrane => recorded.iter().map(|&i| net.state().v[i]).collect(),
            Readout::Spikes => {
                let s: Vec<bool> = recorded.iter().map(|&i| fired[i]).collect();
                rate.push(&s)
            }
        };
        if obs_buf.len() == cfg.buffer {
            obs_buf.pop_front();
            y_buf.pop_front();
        }
        obs_buf.push_back(row.clone());
        y_buf.push_back(y);

        let (pred, warm) = match pending.take() {
            Some((p, w)) => (Some(p), w),
            None => (None, false),
        };
        let (rmse, d_w) = monitor.push(y, pred)?;

        let mut refit = false;
        let need_initial = model.is_none() && obs_buf.len() == cfg.buffer;
        if !need_initial && model.is_some() && t >= warmup {
            let current_loss = match loss.kind {
                LossKind::Rmse => rmse,
                LossKind::Wasserstein => d_w,
            };
            let cooled = last_fit.is_none_or(|f| t - f >= cooldown);
            if cooled && current_loss.is_some_and(|l| l > loss.threshold) {
                refit = true;
            }
        }
        if need_initial || refit {
            model = Some(fit_buffer(&obs_buf, &y_buf, cfg, split_seed(seed, 100 + fits as u64))?);
            last_fit = Some(t);
            fits += 1;
        }

        let next = match &model {
            Some(m) => {
                let f = m.predict(&row)?.point[0];
                match cfg.target {
                    TargetMode::Level => (f, false),
                    TargetMode::Increment => (y + f, false),
                }
            }
            None => (y, true),
        };
        pending = Some(next);

        steps.push(StepRecord { t, observed: y, predicted: pred, rmse, d_w, refit, warmup: warm });
    }
    Ok(RunRecord { steps, fits, recorded })
}

fn fit_buffer(
    obs: &VecDeque<Vec<f64>>,
    ys: &VecDeque<f64>,
    cfg: &ClursnnConfig,
    seed: u64,
) -> Result<ReconstructionModel> {
    let k = obs.front().map_or(0, Vec::len);
    let channels: Vec<Vec<f64>> = (0..k).map(|c| obs.iter().map(|r| r[c]).collect()).collect();
    let ms = crate::series::MultiSeries::new(channels)?;
    let ys: Vec<f64> = ys.iter().copied().collect();
    let target: Vec<f64> = match cfg.target {
        TargetMode::Level => ys,
        TargetMode::Increment => rde::increments(&ys),
    };
    let mut rde_cfg = cfg.rde;
    rde_cfg.horizon = 1;
    if rde_cfg.subset_size() > k {
        rde_cfg.subset_size = Some(k);
    }
    rde::fit(&ms, &target, &rde_cfg, seed)
}

/// Baseline runs share the record format with the spiking predictor.
pub fn run_naive(values: &[f64], window: usize, tda: &TdaConfig) -> Result<RunRecord> {
    let mut monitor = Monitor::new(window, *tda, values.len());
    let mut steps = Vec::with_capacity(values.len());
    let mut pending = None;
    for (t, &y) in values.iter().enumerate() {
        let pred = pending.take();
        let (rmse, d_w) = monitor.push(y, pred)?;
        steps.push(StepRecord { t, observed: y, predicted: pred, rmse, d_w, refit: false, warmup: false });
        pending = Some(y);
    }
    Ok(RunRecord { steps, fits: 0, recorded: vec![] })
}

pub fn run_ar(values: &[f64], cfg: &ArConfig, window: usize, tda: &TdaConfig) -> Result<RunRecord> {
    let mut ar = OnlineAr::new(*cfg)?;
    let mut monitor = Monitor::new(window, *tda, values.len());
    let mut steps = Vec::with_capacity(values.len());
    let mut pending: Option<(f64, bool)> = None;
    for (t, &y) in values.iter().enumerate() {
        let (pred, warm) = match pending.take() {
            Some((p, w)) => (Some(p), w),
            None => (None, false),
        };
        let (rmse, d_w) = monitor.push(y, pred)?;
        let out = ar.step(y);
        steps.push(StepRecord { t, observed: y, predicted: pred, rmse, d_w, refit: out.reset, warmup: warm });
        pending = Some(match out.prediction {
            Some(p) => (p, false),
            None => (y, true),
        });
    }
    Ok(RunRecord { steps, fits: 0, recorded: vec![] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Clursnn { config: Box<ClursnnConfig>, loss: LossSpec },
    Ar { config: ArConfig },
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
    /// Rolling metric window for the baselines; spiking models use their loss window.
    pub window: usize,
}

impl ModelSpec {
    pub fn wass(config: ClursnnConfig) -> Self {
        Self::named("wass", ModelKind::Clursnn { config: Box::new(config), loss: LossSpec::wasserstein() })
    }

    pub fn rmse(config: ClursnnConfig) -> Self {
        Self::named("rmse", ModelKind::Clursnn { config: Box::new(config), loss: LossSpec::rmse() })
    }

    pub fn ar(config: ArConfig) -> Self {
        Self::named("ar", ModelKind::Ar { config })
    }

    pub fn naive() -> Self {
        Self::named("naive", ModelKind::Naive)
    }

    pub fn named(name: &str, kind: ModelKind) -> Self {
        Self { name: name.into(), kind, window: LossSpec::DEFAULT_WINDOW }
    }

    pub fn window(&self) -> usize {
        match &self.kind {
            ModelKind::Clursnn { loss, .. } => loss.window,
            _ => self.window,
        }
    }

    pub fn run(&self, values: &[f64], tda: &TdaConfig, seed: u64) -> Result<RunRecord> {
        match &self.kind {
            ModelKind::Clursnn { config, loss } => run_online(values, config, loss, seed),
            ModelKind::Ar { config } => run_ar(values, config, self.window(), tda),
            ModelKind::Naive => run_naive(values, self.window(), tda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Self {
        Self { mean: mean(xs), std: std_dev(xs) }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean, self.std)
    }
}

/// Per-segment averages of the rolling losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentScores {
    pub avg_rmse: Vec<f64>,
    pub avg_dw: Vec<f64>,
    pub rmse: MeanStd,
    pub dw: MeanStd,
}

fn avg_defined(xs: impl Iterator<Item = Option<f64>>) -> f64 {
    let v: Vec<f64> = xs.flatten().collect();
    if v.is_empty() {
        f64::NAN
    } else {
        mean(&v)
    }
}

/// Averages of the rolling RMSE and rolling Wasserstein distance over each
/// segment, with mean and standard deviation across segments.
pub fn segment_scores(record: &RunRecord, boundaries: &[(usize, usize)]) -> SegmentScores {
    let seg = |r: &(usize, usize)| &record.steps[r.0.min(record.steps.len())..r.1.min(record.steps.len())];
    let avg_rmse: Vec<f64> = boundaries.iter().map(|r| avg_defined(seg(r).iter().map(|s| s.rmse))).collect();
    let avg_dw: Vec<f64> = boundaries.iter().map(|r| avg_defined(seg(r).iter().map(|s| s.d_w))).collect();
    let finite = |v: &[f64]| v.iter().copied().filter(|x| x.is_finite()).collect::<Vec<_>>();
    SegmentScores {
        rmse: MeanStd::of(&finite(&avg_rmse)),
        dw: MeanStd::of(&finite(&avg_dw)),
        avg_rmse,
        avg_dw,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSpec {
    pub epsilon: f64,
}

impl ConvergenceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be > 0"));
        }
        Ok(())
    }
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self { epsilon: 0.1 }
    }
}

/// For each segment, the smallest offset `N` from the segment start such
/// that `|observed - predicted| < epsilon` for every step from `N` to the
/// segment end. Never-converged segments report their length.
pub fn convergence_steps(record: &RunRecord, boundaries: &[(usize, usize)], spec: &ConvergenceSpec) -> Vec<usize> {
    boundaries
        .iter()
        .map(|&(start, end)| {
            let end = end.min(record.steps.len());
            let len = end.saturating_sub(start);
            let mut n = len;
            for off in (0..len).rev() {
                let s = &record.steps[start + off];
                match s.predicted {
                    Some(p) if (s.observed - p).abs() < spec.epsilon => n = off,
                    _ => break,
                }
            }
            n
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub scores: SegmentScores,
    pub convergence: Vec<usize>,
    pub refits: usize,
}

/// Runs every model on the same series and seed.
pub fn compare_models(
    values: &[f64],
    models: &[ModelSpec],
    boundaries: &[(usize, usize)],
    tda: &TdaConfig,
    convergence: &ConvergenceSpec,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    if models.is_empty() {
        return Err(Error::invalid("models", "need at least one model"));
    }
    models
        .par_iter()
        .map(|m| {
            let rec = m.run(values, tda, seed)?;
            Ok(ComparisonRow {
                name: m.name.clone(),
                scores: segment_scores(&rec, boundaries),
                convergence: convergence_steps(&rec, boundaries, convergence),
                refits: rec.refit_count(),
            })
        })
        .collect()
}
