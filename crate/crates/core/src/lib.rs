//! Online forecasting of evolving dynamical systems with a plastic spiking
//! network as an unsupervised feature extractor.
//!
//! The crate is organised bottom-up:
//!
//! - [`dynamics`]: Lorenz63 generator with switching parameter regimes.
//! - [`codec`]: step-forward spike encoding and rate decoding.
//! - [`rsnn`]: leaky integrate-and-fire network with pair-based STDP.
//! - [`graph`]: betweenness centrality for neuron selection.
//! - [`tda`]: Rips persistence and diagram Wasserstein distances.
//! - [`rde`]: randomly distributed embedding ensemble predictor.
//! - [`baselines`]: naive persistence and an online autoregressor.
//! - [`pipeline`]: the online loop, rolling losses and model comparisons.
//! - [`config`], [`io`], [`experiment`]: configuration, CSV ingestion and
//!   artifact emission.

pub mod baselines;
pub mod codec;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod rde;
pub mod rsnn;
pub mod series;
pub mod tda;

pub use error::{Error, Result};
