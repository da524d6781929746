//! Betweenness centrality of the synapse digraph and top-k neuron selection.

use std::collections::VecDeque;
use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rsnn::Topology;

/// Unweighted directed graph as adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    adj: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Self { adj }
    }

    pub fn from_topology(t: &Topology) -> Self {
        let adj = (0..t.n_neurons()).map(|i| t.out_neighbors(i).collect()).collect();
        Self { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Exact,
    /// Brandes accumulation from `sources` uniformly drawn pivots, rescaled by `n / sources`.
    Sampled { sources: usize, seed: u64 },
}

impl Method {
    /// Exact for graphs up to 2000 nodes, otherwise 500 sampled sources.
    pub fn auto(n: usize, seed: u64) -> Self {
        if n <= 2000 {
            Method::Exact
        } else {
            Method::Sampled { sources: 500, seed }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityResult {
    pub scores: Vec<f64>,
    pub method: Method,
}

const CHUNK: usize = 32;

/// Brandes' algorithm over ordered pairs `(v, w)`, `v != w`, endpoints excluded.
pub fn betweenness(g: &Digraph, method: Method) -> CentralityResult {
    let n = g.n();
    let (sources, scale): (Vec<usize>, f64) = match method {
        Method::Exact => ((0..n).collect(), 1.0),
        Method::Sampled { sources, seed } => {
            let k = sources.clamp(1, n.max(1));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s: Vec<usize> = if n == 0 { vec![] } else { sample(&mut rng, n, k).into_vec() };
            s.sort_unstable();
            (s, n as f64 / k as f64)
        }
    };
    // Fixed chunking keeps the floating-point reduction order independent of
    // the thread count.
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut work = Workspace::new(n);
            for &s in chunk {
                work.accumulate(g, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut scores = vec![0.0; n];
    for p in partials {
        for (a, b) in scores.iter_mut().zip(p) {
            *a += b;
        }
    }
    for s in &mut scores {
        *s *= scale;
    }
    CentralityResult { scores, method }
}

struct Workspace {
    stack: Vec<usize>,
    preds: Vec<Vec<usize>>,
    sigma: Vec<f64>,
    dist: Vec<i64>,
    delta: Vec<f64>,
    queue: VecDeque<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            stack: Vec::with_capacity(n),
            preds: vec![Vec::new(); n],
            sigma: vec![0.0; n],
            dist: vec![-1; n],
            delta: vec![0.0; n],
            queue: VecDeque::with_capacity(n),
        }
    }

    fn accumulate(&mut self, g: &Digraph, s: usize, acc: &mut [f64]) {
        for v in self.stack.drain(..) {
            self.preds[v].clear();
            self.sigma[v] = 0.0;
            self.dist[v] = -1;
            self.delta[v] = 0.0;
        }
        self.sigma[s] = 1.0;
        self.dist[s] = 0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.stack.push(v);
            for &w in g.neighbors(v) {
                if self.dist[w] < 0 {
                    self.dist[w] = self.dist[v] + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
        for i in (0..self.stack.len()).rev() {
            let w = self.stack[i];
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for k in 0..self.preds[w].len() {
                let v = self.preds[w][k];
                self.delta[v] += self.sigma[v] * coeff;
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Ids of the `k` highest scores, ordered by descending score then ascending id.
pub fn top_k(result: &CentralityResult, k: usize) -> Result<Vec<usize>> {
    let n = result.scores.len();
    if k == 0 || k > n {
        return Err(Error::OutOfRange { index: k, limit: n });
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| result.scores[b].total_cmp(&result.scores[a]).then(a.cmp(&b)));
    ids.truncate(k);
    Ok(ids)
}

/// Number of neurons to record by default: `max(10, n / 50)`, capped at `n`.
pub fn default_k(n: usize) -> usize {
    (n / 50).max(10).min(n)
}

pub fn write_scores_csv<W: Write>(result: &CentralityResult, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["node", "score"])?;
    for (i, s) in result.scores.iter().enumerate() {
        wtr.write_record([i.to_string(), s.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
