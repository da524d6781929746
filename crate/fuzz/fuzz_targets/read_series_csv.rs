#![no_main]

use libfuzzer_sys::fuzz_target;
use spikecast::io::read_series_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(ts) = read_series_csv(data, "value") {
        assert!(!ts.is_empty());
        assert!(ts.values().iter().all(|v| v.is_finite()));
        if let Some(l) = ts.labels() {
            assert_eq!(l.len(), ts.len());
        }
    }
});
