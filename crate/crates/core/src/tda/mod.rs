//! Sliding-window point clouds, Vietoris-Rips persistence (H0 and H1 over
//! GF(2)) and Wasserstein distances between persistence diagrams.

mod assignment;

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(d) = points.first().map(Vec::len) {
            for p in &points {
                if p.len() != d {
                    return Err(Error::LengthMismatch { expected: d, got: p.len() });
                }
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("points", "must be finite"));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i].iter().zip(&self.points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = self.distance(i, j);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        d
    }

    /// `min_i max_j d(i, j)`. The Rips complex is a cone (hence acyclic)
    /// from this scale on.
    pub fn enclosing_radius(&self) -> f64 {
        let d = self.distance_matrix();
        d.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
    }
}

/// Delay vectors `(x(t), x(t - delay), ..., x(t - (d-1) delay))` for every
/// admissible `t` inside the trailing `window` samples of `values`.
pub fn sliding_window_cloud(values: &[f64], window: usize, embed_dim: usize, delay: usize) -> Result<PointCloud> {
    if embed_dim == 0 || delay == 0 {
        return Err(Error::invalid("embedding", "dimension and delay must be >= 1"));
    }
    let span = (embed_dim - 1) * delay;
    if window <= span {
        return Err(Error::invalid("window", format!("must exceed (d-1)*delay = {span}")));
    }
    if values.len() < window {
        return Err(Error::SeriesTooShort { needed: window, got: values.len() });
    }
    let w = &values[values.len() - window..];
    let points = (span..window).map(|t| (0..embed_dim).map(|k| w[t - k * delay]).collect()).collect();
    PointCloud::new(points)
}

/// Birth/death pairs for H0 and H1. Essential classes have `death = inf`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PersistenceDiagram {
    pub h0: Vec<(f64, f64)>,
    pub h1: Vec<(f64, f64)>,
}

impl PersistenceDiagram {
    pub fn pairs(&self, dim: usize) -> &[(f64, f64)] {
        match dim {
            0 => &self.h0,
            1 => &self.h1,
            _ => &[],
        }
    }

    pub fn finite(&self, dim: usize) -> Vec<(f64, f64)> {
        self.pairs(dim).iter().copied().filter(|p| p.1.is_finite()).collect()
    }

    pub fn essential(&self, dim: usize) -> Vec<f64> {
        self.pairs(dim).iter().filter(|p| p.1.is_infinite()).map(|p| p.0).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["dim", "birth", "death"])?;
        for dim in 0..2 {
            for &(b, d) in self.pairs(dim) {
                let death = if d.is_infinite() { "inf".to_string() } else { d.to_string() };
                wtr.write_record([dim.to_string(), b.to_string(), death])?;
            }
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["dim", "birth", "death"] {
            return Err(Error::Csv("expected header `dim,birth,death`".into()));
        }
        let mut out = Self::default();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.position().map_or(0, |p| p.line());
            let bad = |reason: &str| Error::Row { row, reason: reason.to_string() };
            if rec.len() != 3 {
                return Err(bad("expected 3 fields"));
            }
            let birth: f64 = rec[1].trim().parse().map_err(|_| bad("bad birth"))?;
            let death: f64 = match rec[2].trim() {
                "inf" => f64::INFINITY,
                s => s.parse().map_err(|_| bad("bad death"))?,
            };
            if !birth.is_finite() || death.is_nan() || death < birth {
                return Err(bad("need finite birth <= death"));
            }
            match rec[0].trim() {
                "0" => out.h0.push((birth, death)),
                "1" => out.h1.push((birth, death)),
                _ => return Err(bad("dim must be 0 or 1")),
            }
        }
        Ok(out)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Persistence of the Rips filtration truncated at `max_scale` (default: the
/// enclosing radius). H0 keeps zero-length bars so that every point owns
/// exactly one bar; H1 drops them.
pub fn rips_persistence(cloud: &PointCloud, max_scale: Option<f64>) -> PersistenceDiagram {
    let n = cloud.len();
    if n == 0 {
        return PersistenceDiagram::default();
    }
    let max_scale = max_scale.unwrap_or_else(|| cloud.enclosing_radius());
    let dist = cloud.distance_matrix();

    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] <= max_scale {
                edges.push((dist[i][j], i, j));
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let edge_index: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(k, &(_, i, j))| ((i, j), k)).collect();

    let mut diagram = PersistenceDiagram::default();
    let mut uf = UnionFind::new(n);
    let mut positive = vec![false; edges.len()];
    for (k, &(len, i, j)) in edges.iter().enumerate() {
        if uf.union(i, j) {
            diagram.h0.push((0.0, len));
        } else {
            positive[k] = true;
        }
    }
    let components = (0..n).filter(|&i| uf.find(i) == i).count();
    diagram.h0.extend(std::iter::repeat_n((0.0, f64::INFINITY), components));

    // Triangles as boundary columns over edge indices.
    let mut triangles: Vec<(f64, [usize; 3])> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let Some(&a) = edge_index.get(&(i, j)) else { continue };
            for k in j + 1..n {
                let (Some(&b), Some(&c)) = (edge_index.get(&(i, k)), edge_index.get(&(j, k))) else { continue };
                let mut face = [a, b, c];
                face.sort_unstable();
                triangles.push((edges[face[2]].0, face));
            }
        }
    }
    triangles.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1[2].cmp(&y.1[2])).then(x.1.cmp(&y.1)));

    let mut pivot_of: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut paired = vec![false; edges.len()];
    for (value, face) in &triangles {
        let mut col: Vec<usize> = face.to_vec();
        while let Some(&low) = col.last() {
            match pivot_of.get(&low) {
                Some(other) => col = symmetric_difference(&col, other),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            paired[low] = true;
            let birth = edges[low].0;
            if *value > birth {
                diagram.h1.push((birth, *value));
            }
            pivot_of.insert(low, col);
        }
    }
    for (k, &(len, _, _)) in edges.iter().enumerate() {
        if positive[k] && !paired[k] {
            diagram.h1.push((len, f64::INFINITY));
        }
    }
    diagram
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EssentialPolicy {
    #[default]
    Exclude,
    /// Essential classes are matched in birth order; unequal counts give `inf`.
    MatchByBirth,
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diagonal(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

/// q-Wasserstein distance between the finite pairs of two diagrams with the
/// L-infinity ground metric; unmatched points pay their distance to the diagonal.
pub fn wasserstein_pairs(x: &[(f64, f64)], y: &[(f64, f64)], q: f64) -> f64 {
    let (n, m) = (x.len(), y.len());
    let size = n + m;
    if size == 0 {
        return 0.0;
    }
    let pow = |c: f64| if q == 1.0 { c } else { c.powf(q) };
    let mut cost = vec![vec![0.0; size]; size];
    for (i, &p) in x.iter().enumerate() {
        for (j, &r) in y.iter().enumerate() {
            cost[i][j] = pow(linf(p, r));
        }
        let d = pow(to_diagonal(p));
        for c in cost[i].iter_mut().skip(m) {
            *c = d;
        }
    }
    for (j, &r) in y.iter().enumerate() {
        let d = pow(to_diagonal(r));
        for row in cost.iter_mut().skip(n) {
            row[j] = d;
        }
    }
    let sol = assignment::solve(&cost);
    let total: f64 = sol.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
    if q == 1.0 {
        total
    } else {
        total.powf(1.0 / q)
    }
}

/// Distance between the `dim`-dimensional parts of two diagrams.
pub fn wasserstein(
    x: &PersistenceDiagram,
    y: &PersistenceDiagram,
    q: f64,
    dim: usize,
    essentials: EssentialPolicy,
) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::invalid("q", "must be >= 1"));
    }
    let finite = wasserstein_pairs(&x.finite(dim), &y.finite(dim), q);
    match essentials {
        EssentialPolicy::Exclude => Ok(finite),
        EssentialPolicy::MatchByBirth => {
            let mut a = x.essential(dim);
            let mut b = y.essential(dim);
            if a.len() != b.len() {
                return Ok(f64::INFINITY);
            }
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            let ess: f64 = a.iter().zip(&b).map(|(u, v)| (u - v).abs().powf(q)).sum();
            Ok((finite.powf(q) + ess).powf(1.0 / q))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomologyChoice {
    H0,
    H1,
    /// H1, or H0 when both H1 diagrams are empty.
    #[default]
    H1OrH0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TdaConfig {
    pub embed_dim: usize,
    pub delay: usize,
    pub q: f64,
    pub homology: HomologyChoice,
}

impl Default for TdaConfig {
    fn default() -> Self {
        Self { embed_dim: 3, delay: 2, q: 1.0, homology: HomologyChoice::H1OrH0 }
    }
}

impl TdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.delay == 0 {
            return Err(Error::invalid("tda", "embed_dim and delay must be >= 1"));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(Error::invalid("q", "must be >= 1"));
        }
        Ok(())
    }

    /// Persistence diagram of the trailing `window` samples.
    pub fn window_diagram(&self, values: &[f64], window: usize) -> Result<PersistenceDiagram> {
        let cloud = sliding_window_cloud(values, window, self.embed_dim, self.delay)?;
        Ok(rips_persistence(&cloud, None))
    }

    /// Distance between two precomputed window diagrams.
    pub fn diagram_distance(&self, a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
        let dim = match self.homology {
            HomologyChoice::H0 => 0,
            HomologyChoice::H1 => 1,
            HomologyChoice::H1OrH0 => {
                if a.finite(1).is_empty() && b.finite(1).is_empty() {
                    0
                } else {
                    1
                }
            }
        };
        wasserstein_pairs(&a.finite(dim), &b.finite(dim), self.q)
    }
}

/// Wasserstein distance between the diagrams of the trailing windows of two series.
pub fn rolling_wasserstein(observed: &[f64], predicted: &[f64], window: usize, cfg: &TdaConfig) -> Result<f64> {
    cfg.validate()?;
    let a = cfg.window_diagram(observed, window)?;
    let b = cfg.window_diagram(predicted, window)?;
    Ok(cfg.diagram_distance(&a, &b))
}
