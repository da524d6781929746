#![no_main]

use libfuzzer_sys::fuzz_target;
use spikecast::tda::{wasserstein, EssentialPolicy, PersistenceDiagram};

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = PersistenceDiagram::read_csv(data) {
        if d.h0.len() + d.h1.len() <= 64 {
            for dim in 0..2 {
                let self_dist = wasserstein(&d, &d, 1.0, dim, EssentialPolicy::Exclude).unwrap();
                assert!(self_dist.abs() <= 1e-9);
            }
        }
    }
});
