//! Undirected simple graphs, edge overlap and the brute-force MEO oracle.
//!
//! Edge overlap counts unordered edges: `EO(σ)` is the number of edges
//! `{i, j}` of `G2` for which `{σ(i), σ(j)}` is an edge of `G1`. This is the
//! ordered double sum over adjacency entries divided by two, so that
//! `EO(G, G, id) = |G|`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{factorial, Permutation};

/// Largest vertex count accepted by exhaustive enumeration (10! ≈ 3.6M).
pub const ENUMERATION_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Builds a graph from 0-indexed edges, rejecting loops, duplicates and
    /// out-of-range vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        let mut g = Self { n, adj: vec![false; n * n], edges: Vec::with_capacity(edges.len()) };
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if g.adj[u * n + v] {
                return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
            }
            g.adj[u * n + v] = true;
            g.adj[v * n + u] = true;
            g.edges.push((u.min(v), u.max(v)));
        }
        g.edges.sort_unstable();
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[]).expect("valid")
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    /// Path `0 – 1 – … – (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Self::from_edges(n, &edges).expect("valid")
    }

    /// Star with centre 0.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    /// Erdős–Rényi `G(n, p)`.
    pub fn random<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted edge list with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    /// The graph `τ(G)` whose edges are `{τ(u), τ(v)}`.
    pub fn relabeled(&self, tau: &Permutation) -> Result<Self> {
        check_len(self.n, tau.len())?;
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (tau.apply(u), tau.apply(v))).collect();
        Self::from_edges(self.n, &edges)
    }

    /// Parses either the JSON object form or the `n <int>` edge-list form.
    pub fn parse(source: &str) -> Result<Self> {
        if source.trim_start().starts_with('{') {
            Self::from_json(source)
        } else {
            Self::from_edge_list(source)
        }
    }

    pub fn from_json(source: &str) -> Result<Self> {
        let raw: GraphJson =
            serde_json::from_str(source).map_err(|e| Error::Parse(format!("graph JSON: {e}")))?;
        let edges: Vec<_> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::from_edges(raw.n, &edges)
    }

    pub fn from_edge_list(source: &str) -> Result<Self> {
        let mut lines = source.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["n", count] => count
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad vertex count {count:?}")))?,
            _ => return Err(Error::Parse(format!("expected header \"n <int>\", got {header:?}"))),
        };
        let mut edges = Vec::new();
        for line in lines {
            let parts: Vec<_> = line.split_whitespace().collect();
            let pair = match parts[..] {
                [a, b] => (a.parse::<usize>(), b.parse::<usize>()),
                _ => return Err(Error::Parse(format!("expected \"u v\", got {line:?}"))),
            };
            match pair {
                (Ok(u), Ok(v)) => edges.push((u, v)),
                _ => return Err(Error::Parse(format!("non-integer vertex in {line:?}"))),
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn to_json(&self) -> String {
        let raw = GraphJson { n: self.n, edges: self.edges.iter().map(|&(u, v)| [u, v]).collect() };
        serde_json::to_string(&raw).expect("serializable")
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::SizeMismatch { left, right });
    }
    Ok(())
}

fn check_pair(g1: &Graph, g2: &Graph) -> Result<()> {
    check_len(g1.n, g2.n)
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::Guard { what: "exhaustive enumeration", n, max: ENUMERATION_LIMIT });
    }
    Ok(())
}

/// Number of unordered edges shared by `G1` and `σ(G2)`.
pub fn edge_overlap(g1: &Graph, g2: &Graph, sigma: &Permutation) -> Result<usize> {
    check_pair(g1, g2)?;
    check_len(g1.n, sigma.len())?;
    Ok(overlap_of_slice(g1, g2, sigma.as_slice()))
}

/// Edge overlap for an arbitrary vertex assignment (not necessarily a bijection).
#[inline]
pub(crate) fn overlap_of_slice(g1: &Graph, g2: &Graph, map: &[usize]) -> usize {
    g2.edges.iter().filter(|&&(i, j)| g1.has_edge(map[i], map[j])).count()
}

pub fn max_edge_overlap_bound(g1: &Graph, g2: &Graph) -> usize {
    g1.edge_count().min(g2.edge_count())
}

/// Distribution of edge overlaps over all `n!` permutations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapHistogram {
    pub counts: BTreeMap<usize, u64>,
}

impl OverlapHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Largest overlap attained by at least one permutation.
    pub fn max_overlap(&self) -> usize {
        self.counts.iter().rev().find(|(_, &c)| c > 0).map(|(&k, _)| k).unwrap_or(0)
    }

    pub fn count_at(&self, overlap: usize) -> u64 {
        self.counts.get(&overlap).copied().unwrap_or(0)
    }

    /// Number of permutations with overlap strictly above `e`.
    pub fn count_above(&self, e: usize) -> u64 {
        self.counts.range(e + 1..).map(|(_, c)| c).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("overlap,count\n");
        for (k, c) in &self.counts {
            let _ = writeln!(out, "{k},{c}");
        }
        out
    }
}

/// Enumerates every permutation with Heap's algorithm, partitioned by the
/// image of the last vertex so the work splits across threads. Per-chunk
/// histograms are summed, which is order independent.
pub fn eo_distribution(g1: &Graph, g2: &Graph) -> Result<OverlapHistogram> {
    check_pair(g1, g2)?;
    let n = g1.n;
    check_enumerable(n)?;
    let levels = max_edge_overlap_bound(g1, g2) + 1;

    let chunk = |last: usize| -> Vec<u64> {
        let mut hist = vec![0u64; levels];
        let mut map: Vec<usize> = (0..n).filter(|&v| v != last).collect();
        map.push(last);
        let m = n - 1;
        hist[overlap_of_slice(g1, g2, &map)] += 1;
        // iterative Heap's algorithm over the first n-1 slots
        let mut c = vec![0usize; m];
        let mut i = 1;
        while i < m {
            if c[i] < i {
                if i % 2 == 0 {
                    map.swap(0, i);
                } else {
                    map.swap(c[i], i);
                }
                hist[overlap_of_slice(g1, g2, &map)] += 1;
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        hist
    };

    let hist = (0..n)
        .into_par_iter()
        .map(chunk)
        .reduce(|| vec![0u64; levels], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    debug_assert_eq!(hist.iter().sum::<u64>(), factorial(n));

    let counts = hist.into_iter().enumerate().filter(|(_, c)| *c > 0).collect();
    Ok(OverlapHistogram { counts })
}

/// Exact MEO and how many permutations attain it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeoResult {
    pub meo: usize,
    pub optimal_count: u64,
}

pub fn brute_force_meo(g1: &Graph, g2: &Graph) -> Result<MeoResult> {
    let hist = eo_distribution(g1, g2)?;
    let meo = hist.max_overlap();
    Ok(MeoResult { meo, optimal_count: hist.count_at(meo) })
}

/// `MEO / max(|G1|, |G2|)`; two edgeless graphs have similarity 1.
pub fn similarity(g1: &Graph, g2: &Graph) -> Result<f64> {
    let denom = g1.edge_count().max(g2.edge_count());
    let meo = brute_force_meo(g1, g2)?.meo;
    if denom == 0 {
        return Ok(1.0);
    }
    Ok(meo as f64 / denom as f64)
}

/// `m = |{σ : EO(σ) > e}|`.
pub fn count_exceeding(g1: &Graph, g2: &Graph, e: usize) -> Result<u64> {
    let e_max = max_edge_overlap_bound(g1, g2);
    if e > e_max {
        return Err(Error::InvalidArgument(format!("threshold {e} exceeds E_max = {e_max}")));
    }
    Ok(eo_distribution(g1, g2)?.count_above(e))
}

pub fn is_isomorphic(g1: &Graph, g2: &Graph) -> Result<bool> {
    if g1.n != g2.n || g1.edge_count() != g2.edge_count() {
        // still validate the enumeration guard for consistent errors
        check_enumerable(g1.n.max(g2.n))?;
        return Ok(false);
    }
    Ok(brute_force_meo(g1, g2)?.meo == g1.edge_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::parse(r#"{"n":3,"edges":[[0,1],[1,2],[2,0]]}"#).unwrap()
    }

    #[test]
    fn load_examples() {
        assert_eq!(triangle().edge_count(), 3);
        let empty = Graph::parse(r#"{"n":2,"edges":[]}"#).unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert!(matches!(Graph::parse(r#"{"n":3,"edges":[[0,0]]}"#), Err(Error::SelfLoop(0))));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            Graph::parse(r#"{"n":3,"edges":[[0,3]]}"#),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
        assert!(matches!(
            Graph::parse(r#"{"n":3,"edges":[[0,1],[1,0]]}"#),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(Graph::parse("{nope"), Err(Error::Parse(_))));
        assert!(matches!(Graph::parse("vertices 3\n0 1"), Err(Error::Parse(_))));
        assert!(matches!(Graph::parse("n 3\n0 x"), Err(Error::Parse(_))));
        assert!(Graph::parse(r#"{"n":0,"edges":[]}"#).is_err());
    }

    #[test]
    fn edge_list_format() {
        let g = Graph::parse("n 4\n0 1\n1 2\n\n2 3\n").unwrap();
        assert_eq!(g, Graph::path(4));
        assert_eq!(Graph::parse(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn overlap_examples() {
        let id3 = Permutation::identity(3);
        assert_eq!(edge_overlap(&triangle(), &triangle(), &id3).unwrap(), 3);
        assert_eq!(edge_overlap(&triangle(), &Graph::path(3), &id3).unwrap(), 2);
        let flip = Permutation::new(vec![2, 1, 0]).unwrap();
        assert_eq!(edge_overlap(&Graph::path(3), &Graph::path(3), &flip).unwrap(), 2);
        assert!(matches!(
            edge_overlap(&triangle(), &Graph::path(4), &id3),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn meo_examples() {
        let p4 = Graph::path(4);
        assert_eq!(brute_force_meo(&p4, &p4).unwrap(), MeoResult { meo: 3, optimal_count: 2 });
        assert_eq!(
            brute_force_meo(&triangle(), &Graph::path(3)).unwrap(),
            MeoResult { meo: 2, optimal_count: 6 }
        );
        let c5 = Graph::cycle(5);
        assert_eq!(brute_force_meo(&c5, &c5).unwrap().meo, 5);
    }

    #[test]
    fn guard_at_eleven() {
        let g = Graph::empty(11);
        assert!(matches!(brute_force_meo(&g, &g), Err(Error::Guard { n: 11, .. })));
        assert!(count_exceeding(&g, &g, 0).is_err());
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(similarity(&triangle(), &triangle()).unwrap(), 1.0);
        assert_eq!(similarity(&Graph::complete(4), &Graph::empty(4)).unwrap(), 0.0);
        assert!((similarity(&triangle(), &Graph::path(3)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(similarity(&Graph::empty(3), &Graph::empty(3)).unwrap(), 1.0);
    }

    #[test]
    fn count_exceeding_examples() {
        let p4 = Graph::path(4);
        assert_eq!(count_exceeding(&p4, &p4, 3).unwrap(), 0);
        assert_eq!(count_exceeding(&p4, &p4, 2).unwrap(), 2);
        assert_eq!(count_exceeding(&triangle(), &triangle(), 0).unwrap(), 6);
        assert!(count_exceeding(&p4, &p4, 4).is_err());
    }

    #[test]
    fn distribution_examples() {
        let h = eo_distribution(&triangle(), &triangle()).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(3, 6)]));
        let h = eo_distribution(&triangle(), &Graph::empty(3)).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(0, 6)]));
        let h = eo_distribution(&Graph::path(4), &Graph::path(4)).unwrap();
        assert_eq!(h.total(), 24);
        assert_eq!(h.max_overlap(), 3);
        assert_eq!(h.count_at(3), 2);
        assert!(h.to_csv().starts_with("overlap,count\n"));
    }

    #[test]
    fn isomorphism_examples() {
        assert!(is_isomorphic(&triangle(), &triangle()).unwrap());
        assert!(!is_isomorphic(&Graph::path(4), &Graph::star(4)).unwrap());
        assert_eq!(brute_force_meo(&Graph::path(4), &Graph::star(4)).unwrap().meo, 2);
        let tau = Permutation::new(vec![2, 0, 1]).unwrap();
        assert!(is_isomorphic(&triangle(), &triangle().relabeled(&tau).unwrap()).unwrap());
    }

    #[test]
    fn single_vertex() {
        let g = Graph::empty(1);
        assert_eq!(brute_force_meo(&g, &g).unwrap(), MeoResult { meo: 0, optimal_count: 1 });
    }
}
