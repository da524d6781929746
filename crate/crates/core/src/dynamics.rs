//! Evolving Lorenz63 generator: four parameter regimes stitched together,
//! optional sinusoidal trend, projected onto the x axis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Origin, TimeSeries};

pub type State = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub rho: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl LorenzParams {
    pub const FIXED_POINT: LorenzParams = LorenzParams { rho: 60.0, sigma: 20.0, beta: 8.0 };
    pub const CHAOS: LorenzParams = LorenzParams { rho: 36.0, sigma: 8.5, beta: 3.5 };
    pub const LIMIT_CYCLE: LorenzParams = LorenzParams { rho: 35.0, sigma: 21.0, beta: 1.0 };
    pub const NORMAL: LorenzParams = LorenzParams { rho: 28.0, sigma: 10.0, beta: 2.66 };

    pub fn new(rho: f64, sigma: f64, beta: f64) -> Result<Self> {
        let p = Self { rho, sigma, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.sigma.is_finite() && self.beta.is_finite()) {
            return Err(Error::invalid("lorenz", "parameters must be finite"));
        }
        if self.beta <= 0.0 {
            return Err(Error::invalid("beta", "must be positive"));
        }
        Ok(())
    }

    pub fn vector_field(&self, s: &State) -> State {
        let [x, y, z] = *s;
        [self.sigma * (y - x), x * (self.rho - z) - y, x * y - self.beta * z]
    }

    /// One of the two symmetric non-trivial equilibria, `(+c, +c, rho - 1)`.
    /// Only defined for `rho > 1`.
    pub fn equilibrium(&self) -> Option<State> {
        (self.rho > 1.0).then(|| {
            let c = (self.beta * (self.rho - 1.0)).sqrt();
            [c, c, self.rho - 1.0]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FixedPoint,
    Chaos,
    LimitCycle,
    Normal,
}

impl Mode {
    pub const CANONICAL: [Mode; 4] = [Mode::FixedPoint, Mode::Chaos, Mode::LimitCycle, Mode::Normal];

    pub fn params(self) -> LorenzParams {
        match self {
            Mode::FixedPoint => LorenzParams::FIXED_POINT,
            Mode::Chaos => LorenzParams::CHAOS,
            Mode::LimitCycle => LorenzParams::LIMIT_CYCLE,
            Mode::Normal => LorenzParams::NORMAL,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::FixedPoint => "FP",
            Mode::Chaos => "Chaos",
            Mode::LimitCycle => "LC",
            Mode::Normal => "Normal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub params: LorenzParams,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSchedule {
    segments: Vec<Segment>,
}

impl ModeSchedule {
    pub const CANONICAL_SEGMENT_LEN: usize = 300;

    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("schedule", "must contain at least one segment"));
        }
        for s in &segments {
            s.params.validate()?;
            if s.len == 0 {
                return Err(Error::invalid("schedule", "segment length must be >= 1"));
            }
        }
        Ok(Self { segments })
    }

    /// FP, Chaos, LC, Normal; 300 samples each.
    pub fn canonical() -> Self {
        Self::from_modes(&Mode::CANONICAL, Self::CANONICAL_SEGMENT_LEN)
    }

    pub fn from_modes(modes: &[Mode], len: usize) -> Self {
        let segments = modes.iter().map(|m| Segment { params: m.params(), len }).collect();
        Self::new(segments).expect("built-in modes are valid")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_len(&self) -> usize {
        self.segments.iter().map(|s| s.len).sum()
    }

    /// Half-open `[start, end)` sample ranges of each segment.
    pub fn boundaries(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.segments
            .iter()
            .map(|s| {
                let r = (start, start + s.len);
                start += s.len;
                r
            })
            .collect()
    }
}

/// Integration settings for the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Integration {
    /// RK4 step size.
    pub h: f64,
    /// RK4 steps between stored samples.
    pub substeps: usize,
    /// Seeded uniform jitter applied to each coordinate of the initial state.
    pub jitter: f64,
    pub initial: State,
}

impl Default for Integration {
    fn default() -> Self {
        Self { h: 0.01, substeps: 1, jitter: 1.0, initial: [1.0, 1.0, 1.0] }
    }
}

impl Integration {
    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::invalid("h", "must be positive"));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps", "must be >= 1"));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::invalid("jitter", "must be non-negative"));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial", "must be finite"));
        }
        Ok(())
    }
}

/// Classical fourth-order Runge-Kutta step of the Lorenz63 system.
pub fn lorenz_step(state: &State, params: &LorenzParams, h: f64) -> Result<State> {
    if !(h > 0.0) || state.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationDiverged { step: 0 });
    }
    let add = |s: &State, k: &State, f: f64| [s[0] + f * k[0], s[1] + f * k[1], s[2] + f * k[2]];
    let k1 = params.vector_field(state);
    let k2 = params.vector_field(&add(state, &k1, h / 2.0));
    let k3 = params.vector_field(&add(state, &k2, h / 2.0));
    let k4 = params.vector_field(&add(state, &k3, h));
    let mut out = *state;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationDiverged { step: 0 });
    }
    Ok(out)
}

/// Full 3-D trajectory of an evolving schedule. The state carries across
/// segment boundaries; only the parameters switch.
pub fn trajectory(schedule: &ModeSchedule, integ: &Integration, seed: u64) -> Result<Vec<State>> {
    integ.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = integ.initial;
    if integ.jitter > 0.0 {
        for v in &mut state {
            *v += rng.random_range(-integ.jitter..=integ.jitter);
        }
    }
    let mut out = Vec::with_capacity(schedule.total_len());
    for seg in schedule.segments() {
        for _ in 0..seg.len {
            out.push(state);
            for _ in 0..integ.substeps {
                state = lorenz_step(&state, &seg.params, integ.h)
                    .map_err(|_| Error::IntegrationDiverged { step: out.len() })?;
            }
        }
    }
    Ok(out)
}

/// Evolving series projected onto the x component.
pub fn generate_evolving(schedule: &ModeSchedule, integ: &Integration, seed: u64) -> Result<TimeSeries> {
    let traj = trajectory(schedule, integ, seed)?;
    TimeSeries::new(traj.iter().map(|s| s[0]).collect(), integ.h * integ.substeps as f64, Origin::Synthetic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendSpec {
    pub amplitude: f64,
    pub period: f64,
}

impl TrendSpec {
    pub const NONE: TrendSpec = TrendSpec { amplitude: 0.0, period: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        if self.amplitude != 0.0 && !(self.period.is_finite() && self.period >= 1.0) {
            return Err(Error::invalid("period", "must be >= 1 when amplitude is non-zero"));
        }
        Ok(())
    }

    pub fn value_at(&self, t: usize) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * (2.0 * std::f64::consts::PI * t as f64 / self.period).sin()
    }
}

/// Adds `A sin(2 pi t / T)` to every sample.
pub fn apply_trend(series: &TimeSeries, trend: &TrendSpec) -> Result<TimeSeries> {
    trend.validate()?;
    if trend.amplitude == 0.0 {
        return Ok(series.clone());
    }
    series.map(|t, v| v + trend.value_at(t))
}
