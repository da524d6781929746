#![no_main]

use libfuzzer_sys::fuzz_target;
use spikecast::rsnn::Topology;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let n = usize::from(n).max(1);
    if let Ok(t) = Topology::read_csv(rest, n, 0.2) {
        assert!(t.synapses().iter().all(|s| s.pre != s.post && (s.pre as usize) < n && (s.post as usize) < n));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(Topology::read_csv(buf.as_slice(), n, 0.2).unwrap(), t);
    }
});
