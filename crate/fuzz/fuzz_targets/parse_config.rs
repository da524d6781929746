#![no_main]

use libfuzzer_sys::fuzz_target;
use spikecast::config::parse_config_unchecked;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config_unchecked(text) {
        // anything that parses must validate without panicking and re-emit
        let _ = cfg.validate();
        if let Ok(again) = cfg.to_toml() {
            let _ = parse_config_unchecked(&again);
        }
    }
});
