//! Runs all four models on the canonical evolving series for a few seeds.
//!
//! `cargo run --release -p spikecast --example sweep -- [seeds]`

use std::time::Instant;

use spikecast::config::{ModelName, RunConfig};
use spikecast::experiment::load_dataset;
use spikecast::pipeline::compare_models;

fn main() -> spikecast::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    for seed in 0..seeds {
        let cfg = RunConfig { seed, ..RunConfig::default() };
        let data = load_dataset(&cfg)?;
        let specs: Vec<_> = ModelName::ALL.iter().map(|&m| cfg.model.spec_for(m)).collect();
        let start = Instant::now();
        let rows = compare_models(
            data.normalized.values(),
            &specs,
            &data.boundaries,
            &cfg.model.spiking.tda,
            &cfg.evaluation,
            seed,
        )?;
        print!("seed {seed} ({:.1}s):", start.elapsed().as_secs_f64());
        for r in rows {
            print!("  {} rmse {:.3} d_W {:.3} refits {}", r.name, r.scores.rmse.mean, r.scores.dw.mean, r.refits);
        }
        println!();
    }
    Ok(())
}
