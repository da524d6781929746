//! Recurrent network of leaky integrate-and-fire neurons with pair-based,
//! weight-dependent STDP on excitatory synapses.
//!
//! Time is discrete: one simulation step per input sample. Membrane
//! potentials follow the exponential-Euler update
//! `v <- v_rest + (v - v_rest) * exp(-1 / tau_m) + I`, where `I` is the
//! summed synaptic and external input (mV) arriving this step. Spikes
//! emitted at step `t` reach their targets at step `t + 1`.

use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::SpikeRaster;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifParams {
    /// Membrane time constant in steps.
    pub tau_m: f64,
    pub v_rest: f64,
    pub v_th: f64,
    pub v_reset: f64,
    /// Steps a neuron is clamped to `v_reset` after a spike.
    pub refractory: usize,
}

impl Default for LifParams {
    fn default() -> Self {
        Self { tau_m: 20.0, v_rest: -65.0, v_th: -55.0, v_reset: -70.0, refractory: 2 }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_m.is_finite() && self.tau_m > 0.0) {
            return Err(Error::invalid("tau_m", "must be positive"));
        }
        if !(self.v_reset <= self.v_rest && self.v_rest < self.v_th) {
            return Err(Error::invalid("lif", "need v_reset <= v_rest < v_th"));
        }
        Ok(())
    }

    pub fn decay(&self) -> f64 {
        (-1.0 / self.tau_m).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StdpParams {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        Self { eta_plus: 0.01, eta_minus: 0.01, tau_plus: 20.0, tau_minus: 20.0, w_min: 0.0, w_max: 1.0 }
    }
}

impl StdpParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.eta_plus, self.eta_minus, self.tau_plus, self.tau_minus];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("stdp", "learning rates and time constants must be positive"));
        }
        if !(self.w_min.is_finite() && self.w_max.is_finite() && self.w_min < self.w_max) {
            return Err(Error::invalid("stdp", "need w_min < w_max"));
        }
        Ok(())
    }

    /// Weight change for one pre/post pair, `dt = t_post - t_pre`.
    pub fn delta(&self, w: f64, dt: f64) -> f64 {
        if dt >= 0.0 {
            self.eta_plus * (self.w_max - w) * (-dt.abs() / self.tau_plus).exp()
        } else {
            -self.eta_minus * (w - self.w_min) * (-dt.abs() / self.tau_minus).exp()
        }
    }

    pub fn clamp(&self, w: f64) -> f64 {
        w.clamp(self.w_min, self.w_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: u32,
    pub post: u32,
    /// Magnitude in `[w_min, w_max]`; the sign comes from the presynaptic type.
    pub weight: f64,
    pub plastic: bool,
}

/// Directed synapse graph with excitatory/inhibitory neuron labels.
/// Synapses are stored sorted by `(pre, post)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n: usize,
    excitatory: Vec<bool>,
    synapses: Vec<Synapse>,
    connectivity: f64,
    out_start: Vec<usize>,
    incoming: Vec<Vec<u32>>,
}

pub fn excitatory_count(n: usize) -> usize {
    (4 * n).div_ceil(5)
}

impl Topology {
    pub fn from_synapses(n: usize, mut synapses: Vec<Synapse>, connectivity: f64) -> Result<Self> {
        synapses.sort_by_key(|s| (s.pre, s.post));
        if synapses.windows(2).any(|w| (w[0].pre, w[0].post) == (w[1].pre, w[1].post)) {
            return Err(Error::invalid("synapses", "duplicate synapse"));
        }
        for s in &synapses {
            let (pre, post) = (s.pre as usize, s.post as usize);
            if pre >= n || post >= n {
                return Err(Error::OutOfRange { index: pre.max(post), limit: n });
            }
            if pre == post {
                return Err(Error::invalid("synapses", "self-loops are not allowed"));
            }
            if !s.weight.is_finite() {
                return Err(Error::invalid("synapses", "weight must be finite"));
            }
        }
        let n_exc = excitatory_count(n);
        let excitatory = (0..n).map(|i| i < n_exc).collect();
        let mut out_start = vec![0usize; n + 1];
        for s in &synapses {
            out_start[s.pre as usize + 1] += 1;
        }
        for i in 0..n {
            out_start[i + 1] += out_start[i];
        }
        let mut incoming = vec![Vec::new(); n];
        for (k, s) in synapses.iter().enumerate() {
            incoming[s.post as usize].push(k as u32);
        }
        Ok(Self { n, excitatory, synapses, connectivity, out_start, incoming })
    }

    pub fn n_neurons(&self) -> usize {
        self.n
    }

    pub fn is_excitatory(&self, i: usize) -> bool {
        self.excitatory[i]
    }

    pub fn excitatory_flags(&self) -> &[bool] {
        &self.excitatory
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn connectivity(&self) -> f64 {
        self.connectivity
    }

    pub fn out_synapses(&self, pre: usize) -> &[Synapse] {
        &self.synapses[self.out_start[pre]..self.out_start[pre + 1]]
    }

    pub fn out_neighbors(&self, pre: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_synapses(pre).iter().map(|s| s.post as usize)
    }

    /// Weight as seen by the postsynaptic neuron (negative for inhibitory).
    pub fn signed_weight(&self, s: &Synapse) -> f64 {
        if self.excitatory[s.pre as usize] {
            s.weight
        } else {
            -s.weight
        }
    }

    /// Writes `pre,post,weight,plastic` with signed weights.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["pre", "post", "weight", "plastic"])?;
        for s in &self.synapses {
            wtr.write_record([
                s.pre.to_string(),
                s.post.to_string(),
                self.signed_weight(s).to_string(),
                s.plastic.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Parses the CSV written by [`Topology::write_csv`] for a network of `n`
    /// neurons. Weight signs must agree with the excitatory split.
    pub fn read_csv<R: Read>(r: R, n: usize, connectivity: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["pre", "post", "weight", "plastic"] {
            return Err(Error::Csv("expected header `pre,post,weight,plastic`".into()));
        }
        let n_exc = excitatory_count(n);
        let mut synapses = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.position().map_or(0, |p| p.line());
            let bad = |reason: &str| Error::Row { row, reason: reason.to_string() };
            if rec.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let pre: u32 = rec[0].trim().parse().map_err(|_| bad("bad pre"))?;
            let post: u32 = rec[1].trim().parse().map_err(|_| bad("bad post"))?;
            let signed: f64 = rec[2].trim().parse().map_err(|_| bad("bad weight"))?;
            let plastic: bool = rec[3].trim().parse().map_err(|_| bad("bad plastic flag"))?;
            let exc = (pre as usize) < n_exc;
            if (exc && signed < 0.0) || (!exc && signed > 0.0) {
                return Err(bad("weight sign disagrees with presynaptic type"));
            }
            synapses.push(Synapse { pre, post, weight: signed.abs(), plastic });
        }
        Self::from_synapses(n, synapses, connectivity)
    }
}

/// Erdos-Renyi digraph without self-loops. The first `ceil(4n/5)` neurons
/// are excitatory; only their outgoing synapses are plastic.
pub fn build_topology(n: usize, p: f64, stdp: &StdpParams, seed: u64) -> Result<Topology> {
    if n < 5 {
        return Err(Error::invalid("n_neurons", "must be >= 5"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid("connectivity", "must be in (0, 1]"));
    }
    stdp.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_exc = excitatory_count(n);
    let span = stdp.w_max - stdp.w_min;
    let mut synapses = Vec::with_capacity((p * (n * n) as f64) as usize);
    for pre in 0..n {
        for post in 0..n {
            if pre == post {
                continue;
            }
            if p >= 1.0 || rng.random::<f64>() < p {
                let u: f64 = rng.random_range(0.3..=0.7);
                synapses.push(Synapse {
                    pre: pre as u32,
                    post: post as u32,
                    weight: stdp.w_min + u * span,
                    plastic: pre < n_exc,
                });
            }
        }
    }
    Topology::from_synapses(n, synapses, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsnnState {
    pub v: Vec<f64>,
    pub refractory_left: Vec<usize>,
    pub pre_trace: Vec<f64>,
    pub post_trace: Vec<f64>,
    pub step: u64,
    /// Recurrent input scheduled for the next step.
    pending: Vec<f64>,
}

impl RsnnState {
    pub fn resting(n: usize, lif: &LifParams) -> Self {
        Self {
            v: vec![lif.v_rest; n],
            refractory_left: vec![0; n],
            pre_trace: vec![0.0; n],
            post_trace: vec![0.0; n],
            step: 0,
            pending: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RsnnConfig {
    pub n_neurons: usize,
    pub connectivity: f64,
    pub lif: LifParams,
    pub stdp: StdpParams,
    /// mV delivered per unit excitatory weight.
    pub syn_gain: f64,
    /// Multiplier on `syn_gain` for inhibitory synapses.
    pub inh_gain: f64,
    /// mV delivered to each target neuron by one encoder spike.
    pub input_gain: f64,
    /// Fraction of excitatory neurons wired to each encoder channel.
    pub input_fraction: f64,
}

impl Default for RsnnConfig {
    fn default() -> Self {
        Self {
            n_neurons: 500,
            connectivity: 0.2,
            lif: LifParams::default(),
            stdp: StdpParams::default(),
            syn_gain: 1.0,
            inh_gain: 4.0,
            input_gain: 12.0,
            input_fraction: 0.05,
        }
    }
}

impl RsnnConfig {
    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        self.stdp.validate()?;
        if self.n_neurons < 5 {
            return Err(Error::invalid("n_neurons", "must be >= 5"));
        }
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return Err(Error::invalid("connectivity", "must be in (0, 1]"));
        }
        for (field, v) in [("syn_gain", self.syn_gain), ("inh_gain", self.inh_gain), ("input_gain", self.input_gain)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(field, "must be finite and non-negative"));
            }
        }
        if !(self.input_fraction > 0.0 && self.input_fraction <= 1.0) {
            return Err(Error::invalid("input_fraction", "must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Input drive for [`Network::run`].
#[derive(Debug, Clone, Copy)]
pub enum Drive<'a> {
    /// Encoder spikes, routed through the fixed input projection.
    Spikes(&'a SpikeRaster),
    /// Step-major external current, one value per neuron.
    Current(&'a [Vec<f64>]),
}

/// Output of [`Network::run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// One membrane trace per recorded neuron, in request order.
    pub traces: Vec<Vec<f64>>,
    /// Spikes of every neuron.
    pub raster: SpikeRaster,
}

/// A topology together with its dynamical state and parameters.
#[derive(Debug, Clone)]
pub struct Network {
    cfg: RsnnConfig,
    topology: Topology,
    state: RsnnState,
    /// For each encoder channel, the neurons it drives.
    input_map: Vec<Vec<u32>>,
    plastic: bool,
    decay_pre: f64,
    decay_post: f64,
}

impl Network {
    pub fn new(cfg: RsnnConfig, input_channels: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let topology = build_topology(cfg.n_neurons, cfg.connectivity, &cfg.stdp, seed)?;
        // Separate stream so the input projection does not shift the graph draw.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let n_exc = excitatory_count(cfg.n_neurons);
        let per_channel = ((cfg.input_fraction * n_exc as f64).round() as usize).clamp(1, n_exc);
        let input_map = (0..input_channels)
            .map(|_| {
                let mut ids: Vec<u32> = sample(&mut rng, n_exc, per_channel).into_iter().map(|i| i as u32).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        Ok(Self::with_topology(cfg, topology, input_map))
    }

    pub fn with_topology(cfg: RsnnConfig, topology: Topology, input_map: Vec<Vec<u32>>) -> Self {
        let state = RsnnState::resting(topology.n_neurons(), &cfg.lif);
        Self {
            decay_pre: (-1.0 / cfg.stdp.tau_plus).exp(),
            decay_post: (-1.0 / cfg.stdp.tau_minus).exp(),
            cfg,
            topology,
            state,
            input_map,
            plastic: true,
        }
    }

    pub fn config(&self) -> &RsnnConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn state(&self) -> &RsnnState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut RsnnState {
        &mut self.state
    }

    pub fn input_map(&self) -> &[Vec<u32>] {
        &self.input_map
    }

    pub fn n_neurons(&self) -> usize {
        self.topology.n_neurons()
    }

    pub fn is_plastic(&self) -> bool {
        self.plastic
    }

    pub fn freeze_plasticity(&mut self) {
        self.plastic = false;
    }

    pub fn resume_plasticity(&mut self) {
        self.plastic = true;
    }

    /// External current produced by one step of encoder spikes.
    pub fn input_current(&self, encoder_spikes: &[bool]) -> Vec<f64> {
        let mut current = vec![0.0; self.n_neurons()];
        for (c, &s) in encoder_spikes.iter().enumerate() {
            if s {
                if let Some(targets) = self.input_map.get(c) {
                    for &i in targets {
                        current[i as usize] += self.cfg.input_gain;
                    }
                }
            }
        }
        current
    }

    /// Advances one step with the given external current and returns which
    /// neurons spiked.
    pub fn step(&mut self, external: &[f64]) -> Result<Vec<bool>> {
        let n = self.n_neurons();
        if external.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: external.len() });
        }
        if let Some(index) = external.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let lif = self.cfg.lif;
        let decay = lif.decay();
        let st = &mut self.state;

        for t in st.pre_trace.iter_mut() {
            *t *= self.decay_pre;
        }
        for t in st.post_trace.iter_mut() {
            *t *= self.decay_post;
        }

        let mut spikes = vec![false; n];
        for i in 0..n {
            if st.refractory_left[i] > 0 {
                st.refractory_left[i] -= 1;
                st.v[i] = lif.v_reset;
                continue;
            }
            let v = lif.v_rest + (st.v[i] - lif.v_rest) * decay + external[i] + st.pending[i];
            if v >= lif.v_th {
                spikes[i] = true;
                st.v[i] = lif.v_reset;
                st.refractory_left[i] = lif.refractory;
            } else {
                st.v[i] = v;
            }
        }

        if self.plastic {
            let stdp = self.cfg.stdp;
            let syn = &mut self.topology.synapses;
            // Depression: pre fires after earlier post spikes. Post traces
            // have not yet seen this step's spikes, so dt < 0 strictly.
            for pre in (0..n).filter(|&j| spikes[j]) {
                let range = self.topology.out_start[pre]..self.topology.out_start[pre + 1];
                for s in &mut syn[range] {
                    let y = st.post_trace[s.post as usize];
                    if s.plastic && y > 0.0 {
                        s.weight = stdp.clamp(s.weight - stdp.eta_minus * (s.weight - stdp.w_min) * y);
                    }
                }
            }
            for j in (0..n).filter(|&j| spikes[j]) {
                st.pre_trace[j] = 1.0;
            }
            // Potentiation: post fires at or after the latest pre spike.
            for post in (0..n).filter(|&i| spikes[i]) {
                for &k in &self.topology.incoming[post] {
                    let s = &mut syn[k as usize];
                    let x = st.pre_trace[s.pre as usize];
                    if s.plastic && x > 0.0 {
                        s.weight = stdp.clamp(s.weight + stdp.eta_plus * (stdp.w_max - s.weight) * x);
                    }
                }
            }
        } else {
            for j in (0..n).filter(|&j| spikes[j]) {
                st.pre_trace[j] = 1.0;
            }
        }
        for i in (0..n).filter(|&i| spikes[i]) {
            st.post_trace[i] = 1.0;
        }

        st.pending.iter_mut().for_each(|p| *p = 0.0);
        let exc_gain = self.cfg.syn_gain;
        let inh_gain = self.cfg.syn_gain * self.cfg.inh_gain;
        for pre in (0..n).filter(|&j| spikes[j]) {
            let gain = if self.topology.excitatory[pre] { exc_gain } else { -inh_gain };
            for s in self.topology.out_synapses(pre) {
                st.pending[s.post as usize] += gain * s.weight;
            }
        }
        st.step += 1;
        Ok(spikes)
    }

    /// Drives the network for `steps` steps, recording the membrane
    /// potential of every neuron in `record` after each step.
    pub fn run(&mut self, drive: Drive<'_>, steps: usize, record: &[usize]) -> Result<RunOutput> {
        if record.is_empty() {
            return Err(Error::EmptyRecording);
        }
        let n = self.n_neurons();
        if let Some(&bad) = record.iter().find(|&&i| i >= n) {
            return Err(Error::OutOfRange { index: bad, limit: n });
        }
        let dense = match drive {
            Drive::Spikes(r) => {
                if r.horizon() < steps {
                    return Err(Error::SeriesTooShort { needed: steps, got: r.horizon() });
                }
                Some(r.to_steps())
            }
            Drive::Current(c) => {
                if c.len() < steps {
                    return Err(Error::SeriesTooShort { needed: steps, got: c.len() });
                }
                None
            }
        };
        let mut traces = vec![Vec::with_capacity(steps); record.len()];
        let mut spikes = Vec::with_capacity(steps);
        for t in 0..steps {
            let current = match (&dense, drive) {
                (Some(d), _) => self.input_current(&d[t]),
                (None, Drive::Current(c)) => c[t].clone(),
                _ => unreachable!(),
            };
            spikes.push(self.step(&current)?);
            for (tr, &i) in traces.iter_mut().zip(record) {
                tr.push(self.state.v[i]);
            }
        }
        Ok(RunOutput { traces, raster: SpikeRaster::from_steps(&spikes, n) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(n: usize, p: f64) -> RsnnConfig {
        RsnnConfig { n_neurons: n, connectivity: p, ..RsnnConfig::default() }
    }

    #[test]
    fn four_to_one_split() {
        let t = build_topology(5, 0.5, &StdpParams::default(), 0).unwrap();
        assert_eq!(t.excitatory_flags(), &[true, true, true, true, false]);
        assert_eq!(excitatory_count(500), 400);
    }

    #[test]
    fn complete_digraph() {
        let t = build_topology(5, 1.0, &StdpParams::default(), 0).unwrap();
        assert_eq!(t.synapses().len(), 20);
        assert!(t.synapses().iter().all(|s| s.pre != s.post));
        assert!(t.synapses().iter().all(|s| s.plastic == (s.pre < 4)));
        assert!(t.synapses().iter().all(|s| (0.3..=0.7).contains(&s.weight)));
    }

    #[test]
    fn erdos_renyi_edge_count() {
        let stdp = StdpParams::default();
        let a = build_topology(500, 0.2, &stdp, 11).unwrap();
        let b = build_topology(500, 0.2, &stdp, 11).unwrap();
        assert_eq!(a, b);
        let trials = 500.0 * 499.0;
        let mean = 0.2 * trials;
        let sd = (trials * 0.2 * 0.8_f64).sqrt();
        let m = a.synapses().len() as f64;
        assert!((m - mean).abs() <= 3.0 * sd, "{m} vs {mean} +- {sd}");
    }

    #[test]
    fn rejects_bad_topology_args() {
        assert!(build_topology(4, 0.2, &StdpParams::default(), 0).is_err());
        assert!(build_topology(10, 0.0, &StdpParams::default(), 0).is_err());
    }

    #[test]
    fn zero_input_decay_is_exponential() {
        let mut net = Network::new(tiny(10, 0.3), 2, 0).unwrap();
        let lif = net.config().lif;
        net.state_mut().v[0] = lif.v_rest + 10.0;
        for t in 1..=50 {
            let s = net.step(&[0.0; 10]).unwrap();
            assert!(!s[0]);
            let expected = lif.v_rest + 10.0 * (-(t as f64) / lif.tau_m).exp();
            assert!((net.state().v[0] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn subthreshold_current_settles() {
        let cfg = RsnnConfig { syn_gain: 0.0, ..tiny(10, 0.3) };
        let mut net = Network::new(cfg, 1, 0).unwrap();
        let lif = cfg.lif;
        // Fixed point v* = v_rest + I / (1 - decay) must stay below threshold.
        let i = 0.9 * (lif.v_th - lif.v_rest) * (1.0 - lif.decay());
        let mut cur = vec![0.0; 10];
        cur[3] = i;
        for _ in 0..2000 {
            assert!(!net.step(&cur).unwrap().iter().any(|&s| s));
        }
        let fixed = lif.v_rest + i / (1.0 - lif.decay());
        assert!((net.state().v[3] - fixed).abs() < 1e-9);
    }

    #[test]
    fn refractory_blocks_spiking() {
        let mut net = Network::new(RsnnConfig { syn_gain: 0.0, ..tiny(10, 0.3) }, 1, 0).unwrap();
        let big = vec![100.0; 10];
        let mut last_spike: Option<u64> = None;
        for t in 0..30u64 {
            let s = net.step(&big).unwrap();
            if s[0] {
                if let Some(prev) = last_spike {
                    assert!(t - prev > net.config().lif.refractory as u64);
                }
                last_spike = Some(t);
            }
        }
        assert!(last_spike.is_some());
    }

    #[test]
    fn pre_then_post_matches_closed_form() {
        let stdp = StdpParams::default();
        let syn = vec![Synapse { pre: 0, post: 1, weight: 0.5, plastic: true }];
        let topo = Topology::from_synapses(5, syn, 0.0).unwrap();
        let cfg = RsnnConfig { n_neurons: 5, syn_gain: 0.0, ..RsnnConfig::default() };
        let mut net = Network::with_topology(cfg, topo, vec![]);
        let mut cur = vec![0.0; 5];
        cur[0] = 100.0;
        net.step(&cur).unwrap();
        let mut cur = vec![0.0; 5];
        cur[1] = 100.0;
        net.step(&cur).unwrap();
        let w = net.topology().synapses()[0].weight;
        let expected = 0.5 + 0.01 * 0.5 * (-1.0f64 / 20.0).exp();
        assert!((w - expected).abs() < 1e-12);
        assert!((stdp.delta(0.5, 1.0) - 0.004756).abs() < 1e-6);
    }

    #[test]
    fn post_then_pre_depresses() {
        let syn = vec![Synapse { pre: 0, post: 1, weight: 0.5, plastic: true }];
        let topo = Topology::from_synapses(5, syn, 0.0).unwrap();
        let cfg = RsnnConfig { n_neurons: 5, syn_gain: 0.0, ..RsnnConfig::default() };
        let mut net = Network::with_topology(cfg, topo, vec![]);
        let mut cur = vec![0.0; 5];
        cur[1] = 100.0;
        net.step(&cur).unwrap();
        net.step(&[0.0; 5]).unwrap();
        let mut cur = vec![0.0; 5];
        cur[0] = 100.0;
        net.step(&cur).unwrap();
        let w = net.topology().synapses()[0].weight;
        let expected = 0.5 - 0.01 * 0.5 * (-2.0f64 / 20.0).exp();
        assert!((w - expected).abs() < 1e-12, "{w} vs {expected}");
    }

    #[test]
    fn inhibitory_synapses_are_static_and_negative() {
        let syn = vec![Synapse { pre: 4, post: 0, weight: 0.5, plastic: false }];
        let topo = Topology::from_synapses(5, syn, 0.0).unwrap();
        let cfg = RsnnConfig { n_neurons: 5, ..RsnnConfig::default() };
        let mut net = Network::with_topology(cfg, topo, vec![]);
        let mut cur = vec![0.0; 5];
        cur[4] = 100.0;
        net.step(&cur).unwrap();
        net.step(&[0.0; 5]).unwrap();
        assert!(net.state().v[0] < cfg.lif.v_rest);
        assert_eq!(net.topology().synapses()[0].weight, 0.5);
    }

    #[test]
    fn freeze_keeps_weights_and_resume_learns() {
        let mut net = Network::new(tiny(40, 0.3), 2, 3).unwrap();
        net.freeze_plasticity();
        net.freeze_plasticity();
        assert!(!net.is_plastic());
        let before = net.topology().clone();
        let drive: Vec<Vec<f64>> = (0..100).map(|t| vec![if t % 3 == 0 { 30.0 } else { 0.0 }; 40]).collect();
        net.run(Drive::Current(&drive), 100, &[0]).unwrap();
        assert_eq!(net.topology(), &before);
        net.resume_plasticity();
        net.run(Drive::Current(&drive), 100, &[0]).unwrap();
        assert_ne!(net.topology(), &before);
    }

    #[test]
    fn run_shapes_and_errors() {
        let mut net = Network::new(tiny(50, 0.2), 2, 0).unwrap();
        let raster = SpikeRaster::empty(2, 40);
        assert!(matches!(net.run(Drive::Spikes(&raster), 40, &[]), Err(Error::EmptyRecording)));
        let out = net.run(Drive::Spikes(&raster), 40, &[1, 7, 9]).unwrap();
        assert_eq!(out.traces.len(), 3);
        assert!(out.traces.iter().all(|t| t.len() == 40));
        assert_eq!(out.raster.spike_count(), 0);
        assert!(out.traces.iter().flatten().all(|&v| v == -65.0));
        assert!(net.run(Drive::Spikes(&raster), 40, &[50]).is_err());
    }

    #[test]
    fn non_finite_current_rejected() {
        let mut net = Network::new(tiny(10, 0.3), 1, 0).unwrap();
        let mut cur = vec![0.0; 10];
        cur[2] = f64::NAN;
        assert!(matches!(net.step(&cur), Err(Error::NonFinite { index: 2 })));
    }

    #[test]
    fn topology_csv_round_trip() {
        let t = build_topology(12, 0.3, &StdpParams::default(), 5).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Topology::read_csv(buf.as_slice(), 12, 0.3).unwrap();
        assert_eq!(back, t);
        assert!(Topology::read_csv("pre,post,weight,plastic\n11,0,0.5,false\n".as_bytes(), 12, 0.3).is_err());
    }
}
