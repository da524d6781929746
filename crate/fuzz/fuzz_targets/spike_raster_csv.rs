#![no_main]

use libfuzzer_sys::fuzz_target;
use spikecast::codec::{decode, DecoderConfig, SpikeRaster};

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = SpikeRaster::read_csv(data, None, None) {
        // keep decoding cheap on huge horizons
        if r.horizon() <= 1 << 16 && r.n_channels() <= 256 {
            let d = decode(&r, &DecoderConfig::default()).unwrap();
            assert_eq!(d.n_channels(), r.n_channels());
        }
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(SpikeRaster::read_csv(buf.as_slice(), Some(r.n_channels()), Some(r.horizon())).unwrap(), r);
    }
});
