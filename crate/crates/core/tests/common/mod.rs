//! Naive reference implementations shared by the integration tests.
#![allow(dead_code)]

use meosim::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All permutations of `0..n` by Heap's algorithm.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut out = vec![a.clone()];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Edges `{u,v}` of `g1` whose image `{p(u),p(v)}` is an edge of `g2`.
pub fn overlap(g1: &Graph, g2: &Graph, p: &[usize]) -> usize {
    g1.edges().iter().filter(|&&(u, v)| g2.has_edge(p[u], p[v])).count()
}

pub fn all_overlaps(g1: &Graph, g2: &Graph) -> Vec<usize> {
    permutations(g1.n()).iter().map(|p| overlap(g1, g2, p)).collect()
}

pub fn naive_meo(g1: &Graph, g2: &Graph) -> usize {
    all_overlaps(g1, g2).into_iter().max().unwrap_or(0)
}

pub fn naive_exceeding(g1: &Graph, g2: &Graph, e: usize) -> u64 {
    all_overlaps(g1, g2).into_iter().filter(|&o| o > e).count() as u64
}

/// Independent G(n, p) sampler; a pair is redrawn until both graphs have
/// an edge so that the threshold range is not trivial.
pub fn random_pair(n: usize, rng: &mut ChaCha8Rng) -> (Graph, Graph) {
    loop {
        let g1 = sample(n, rng);
        let g2 = sample(n, rng);
        if g1.edge_count() > 0 && g2.edge_count() > 0 {
            return (g1, g2);
        }
    }
}

fn sample(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    let p = rng.gen_range(0.25..0.85);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Normalised amplitudes of the m-th candidate, `(N − m, m) / norm`.
pub fn candidate(m: u64, nfact: u64) -> (f64, f64) {
    let a = (nfact - m) as f64;
    let b = m as f64;
    let r = a.hypot(b);
    (a / r, b / r)
}
