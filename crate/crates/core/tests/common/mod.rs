//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Rank of a set of GF(2) vectors packed in `u64`s.
fn rank(mut rows: Vec<u64>) -> usize {
    let mut r = 0;
    for bit in 0..64 {
        let Some(p) = (r..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else { continue };
        rows.swap(r, p);
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && *row >> bit & 1 == 1 {
                *row ^= pivot;
            }
        }
        r += 1;
    }
    r
}

/// Basis of the kernel of the linear map sending basis vector `i` to `images[i]`.
fn kernel(images: &[u64]) -> Vec<u64> {
    // Gaussian elimination on [image | identity].
    let mut rows: Vec<(u64, u64)> = images.iter().enumerate().map(|(i, &v)| (v, 1u64 << i)).collect();
    let mut r = 0;
    for bit in 0..64 {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0 >> bit & 1 == 1) else { continue };
        rows.swap(r, p);
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0 >> bit & 1 == 1 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        r += 1;
    }
    rows.into_iter().filter(|row| row.0 == 0).map(|row| row.1).collect()
}

/// Rips persistence of a cloud of at most 6 points computed from persistent
/// Betti numbers (ranks of cycle and boundary spaces for every pair of
/// filtration values), independent of any column reduction. Returns
/// sorted `(birth, death)` multisets for H0 and H1 over the full 2-skeleton.
pub fn rips_oracle(points: &[Vec<f64>]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let n = points.len();
    assert!(n <= 6);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, dist(&points[i], &points[j])));
        }
    }
    let edge_index = |a: usize, b: usize| edges.iter().position(|e| e.0 == a.min(b) && e.1 == a.max(b)).unwrap();
    let mut tris = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let e = [edge_index(i, j), edge_index(i, k), edge_index(j, k)];
                let d = e.iter().map(|&x| edges[x].2).fold(0.0, f64::max);
                tris.push((e, d));
            }
        }
    }
    let mut values: Vec<f64> = std::iter::once(0.0).chain(edges.iter().map(|e| e.2)).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let m = values.len();

    // Boundary images as bitsets over vertices / edges.
    let edge_bd: Vec<u64> = edges.iter().map(|e| (1u64 << e.0) | (1u64 << e.1)).collect();
    let tri_bd: Vec<u64> = tris.iter().map(|t| t.0.iter().fold(0u64, |acc, &e| acc | (1u64 << e))).collect();
    let vertices_at = |_a: f64| (0..n).collect::<Vec<_>>();
    let edges_at = |a: f64| (0..edges.len()).filter(|&e| edges[e].2 <= a).collect::<Vec<_>>();
    let tris_at = |a: f64| (0..tris.len()).filter(|&t| tris[t].1 <= a).collect::<Vec<_>>();

    // Persistent Betti number beta_p^{a,b} = dim Z_p(a) - dim(Z_p(a) ∩ B_p(b)).
    let beta = |p: usize, a: f64, b: f64| -> i64 {
        let (cycles, boundaries): (Vec<u64>, Vec<u64>) = match p {
            0 => {
                let z: Vec<u64> = vertices_at(a).iter().map(|&v| 1u64 << v).collect();
                let bnd: Vec<u64> = edges_at(b).iter().map(|&e| edge_bd[e]).collect();
                (z, bnd)
            }
            _ => {
                let ea = edges_at(a);
                let imgs: Vec<u64> = ea.iter().map(|&e| edge_bd[e]).collect();
                let z: Vec<u64> = kernel(&imgs)
                    .into_iter()
                    .map(|coeffs| {
                        ea.iter().enumerate().filter(|(i, _)| coeffs >> i & 1 == 1).fold(0u64, |acc, (_, &e)| acc | (1u64 << e))
                    })
                    .collect();
                let bnd: Vec<u64> = tris_at(b).iter().map(|&t| tri_bd[t]).collect();
                (z, bnd)
            }
        };
        let dz = rank(cycles.clone()) as i64;
        let db = rank(boundaries.clone()) as i64;
        let dsum = rank(cycles.into_iter().chain(boundaries).collect()) as i64;
        dz - (dz + db - dsum)
    };

    let mut out = (Vec::new(), Vec::new());
    for p in 0..2 {
        let b = |i: isize, j: usize| if i < 0 { 0 } else { beta(p, values[i as usize], values[j]) };
        let dst = if p == 0 { &mut out.0 } else { &mut out.1 };
        for i in 0..m {
            for j in i + 1..m {
                let mult = b(i as isize, j - 1) - b(i as isize - 1, j - 1) - b(i as isize, j) + b(i as isize - 1, j);
                assert!(mult >= 0);
                for _ in 0..mult {
                    dst.push((values[i], values[j]));
                }
            }
            let ess = b(i as isize, m - 1) - b(i as isize - 1, m - 1);
            for _ in 0..ess {
                dst.push((values[i], f64::INFINITY));
            }
        }
    }
    out.0.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.1.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// q-Wasserstein distance by enumerating every partial matching.
pub fn wasserstein_oracle(x: &[(f64, f64)], y: &[(f64, f64)], q: f64) -> f64 {
    fn go(i: usize, x: &[(f64, f64)], y: &[(f64, f64)], used: &mut Vec<bool>, q: f64, acc: f64, best: &mut f64) {
        if i == x.len() {
            let rest: f64 = y.iter().zip(used.iter()).filter(|(_, &u)| !u).map(|(p, _)| ((p.1 - p.0) / 2.0).powf(q)).sum();
            *best = best.min(acc + rest);
            return;
        }
        let p = x[i];
        go(i + 1, x, y, used, q, acc + ((p.1 - p.0) / 2.0).powf(q), best);
        for j in 0..y.len() {
            if !used[j] {
                used[j] = true;
                let c = (p.0 - y[j].0).abs().max((p.1 - y[j].1).abs());
                go(i + 1, x, y, used, q, acc + c.powf(q), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, x, y, &mut vec![false; y.len()], q, 0.0, &mut best);
    best.powf(1.0 / q)
}

pub fn random_diagram(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<(f64, f64)> {
    let k = rng.random_range(0..=max_len);
    (0..k)
        .map(|_| {
            let b: f64 = rng.random_range(0.0..2.0);
            (b, b + rng.random_range(0.0..2.0))
        })
        .collect()
}

/// Betweenness by enumerating every simple path between every ordered pair
/// and keeping the shortest ones.
pub fn betweenness_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut adj = vec![vec![]; n];
    for &(u, v) in edges {
        if u != v && !adj[u].contains(&v) {
            adj[u].push(v);
        }
    }
    fn paths(u: usize, t: usize, adj: &[Vec<usize>], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if u == t {
            out.push(cur.clone());
            return;
        }
        for &v in &adj[u] {
            if !cur.contains(&v) {
                cur.push(v);
                paths(v, t, adj, cur, out);
                cur.pop();
            }
        }
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let mut all = Vec::new();
            paths(s, t, &adj, &mut vec![s], &mut all);
            let Some(min) = all.iter().map(Vec::len).min() else { continue };
            let shortest: Vec<_> = all.into_iter().filter(|p| p.len() == min).collect();
            let total = shortest.len() as f64;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|p| p.contains(&v)).count() as f64;
                score[v] += through / total;
            }
        }
    }
    score
}

pub fn random_digraph(rng: &mut ChaCha8Rng, max_n: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.random_range(1..=max_n);
    let p: f64 = rng.random_range(0.1..0.6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    (n, edges)
}

pub fn sorted_pairs(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn pairs_match(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(p, q)| {
            (p.0 - q.0).abs() <= tol && (p.1 == q.1 || (p.1 - q.1).abs() <= tol)
        })
}
