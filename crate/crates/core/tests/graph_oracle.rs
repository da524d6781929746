mod common;

use common::*;
use spikecast::graph::{betweenness, Digraph, Method};

#[test]
fn brandes_matches_path_enumeration() {
    let mut r = rng(21);
    for trial in 0..100 {
        let (n, edges) = random_digraph(&mut r, 8);
        let got = betweenness(&Digraph::new(n, &edges), Method::Exact).scores;
        let want = betweenness_oracle(n, &edges);
        for v in 0..n {
            assert!((got[v] - want[v]).abs() <= 1e-9, "trial {trial} node {v}: {} vs {}", got[v], want[v]);
        }
    }
}
