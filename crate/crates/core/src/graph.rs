//! Configuration model with clustering.
//!
//! Every node gets `k_s` single half-edges and `k_delta` triangle half-edge
//! pairs. Single half-edges are paired uniformly at random and triangle pairs
//! are grouped in threes, each group closing a triangle. Self-loops and
//! parallel edges created by the matching are then erased.

use std::io::{self, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::degree::{DegreeDistribution, EdgeKind, JointDegree};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub entries: Vec<JointDegree>,
}

impl DegreeSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `n` i.i.d. draws from `dist`, deterministic in `seed`.
pub fn sample_degrees(dist: &DegreeDistribution, n: usize, seed: u64) -> Result<DegreeSequence> {
    if n == 0 {
        return Err(Error::InvalidInput("graph size must be at least 1".into()));
    }
    let atoms: Vec<(JointDegree, f64)> = dist.iter().collect();
    let index = WeightedIndex::new(atoms.iter().map(|a| a.1))
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n).map(|_| atoms[index.sample(&mut rng)].0).collect();
    Ok(DegreeSequence { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub kind: EdgeKind,
    /// Index into [`CmcGraph::built_triangles`] for triangle edges.
    pub triangle: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GenerationReport {
    pub erased_single_halfedges: u32,
    pub erased_triangle_pairs: u32,
    pub self_loops_removed: u64,
    pub multi_edges_merged: u64,
}

/// Simple undirected graph in CSR form. Neighbour lists are sorted.
#[derive(Debug, Clone)]
pub struct CmcGraph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    slot_edge: Vec<u32>,
    edges: Vec<Edge>,
    built_triangles: Vec<[u32; 3]>,
}

impl CmcGraph {
    /// Builds a graph from an explicit edge list (deduplicated, self-loops
    /// dropped). Mostly useful for tests and small hand-made examples.
    pub fn from_edges(n: usize, edges: &[(u32, u32, EdgeKind)]) -> Self {
        let raw: Vec<RawEdge> = edges
            .iter()
            .map(|&(u, v, kind)| RawEdge { u, v, kind, triangle: None })
            .collect();
        let (graph, _) = Self::assemble(n, raw, Vec::new());
        graph
    }

    fn assemble(n: usize, raw: Vec<RawEdge>, built_triangles: Vec<[u32; 3]>) -> (Self, (u64, u64)) {
        let mut self_loops = 0u64;
        // (u, v, kind, triangle) packed into one integer so that sorting
        // orders by node pair with triangle edges first; they win the merge
        let mut keyed: Vec<u128> = Vec::with_capacity(raw.len());
        for e in raw {
            if e.u == e.v {
                self_loops += 1;
                continue;
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            let rank: u128 = match e.kind {
                EdgeKind::Triangle => 0,
                EdgeKind::Single => 1,
            };
            let tri = e.triangle.unwrap_or(u32::MAX);
            keyed.push((u128::from(u) << 96) | (u128::from(v) << 64) | (rank << 32) | u128::from(tri));
        }
        keyed.sort_unstable();

        let mut edges: Vec<Edge> = Vec::with_capacity(keyed.len());
        let mut merged = 0u64;
        let mut last_pair = None;
        for k in keyed {
            let pair = (k >> 64) as u64;
            if last_pair == Some(pair) {
                merged += 1;
                continue;
            }
            last_pair = Some(pair);
            let tri = k as u32;
            let (kind, triangle) = if (k >> 32) as u32 == 0 {
                (EdgeKind::Triangle, (tri != u32::MAX).then_some(tri))
            } else {
                (EdgeKind::Single, None)
            };
            edges.push(Edge { u: (pair >> 32) as u32, v: pair as u32, kind, triangle });
        }

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.u as usize] += 1;
            degree[e.v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut slot_edge = vec![0u32; offsets[n]];
        // Edges are sorted by (u, v) with u < v, so every list comes out sorted.
        for (idx, e) in edges.iter().enumerate() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                let slot = &mut fill[a as usize];
                neighbors[*slot] = b;
                slot_edge[*slot] = idx as u32;
                *slot += 1;
            }
        }
        let graph = Self {
            n,
            offsets,
            neighbors,
            slot_edge,
            edges,
            built_triangles,
        };
        (graph, (self_loops, merged))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Triangles as matched, before erasure.
    pub fn built_triangles(&self) -> &[[u32; 3]] {
        &self.built_triangles
    }

    pub fn degree(&self, u: u32) -> usize {
        self.offsets[u as usize + 1] - self.offsets[u as usize]
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.neighbors[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    /// `(neighbour, edge)` pairs in neighbour order.
    pub fn incident(&self, u: u32) -> impl Iterator<Item = (u32, &Edge)> + '_ {
        let range = self.offsets[u as usize]..self.offsets[u as usize + 1];
        self.neighbors[range.clone()]
            .iter()
            .zip(&self.slot_edge[range])
            .map(|(&v, &e)| (v, &self.edges[e as usize]))
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// The third member of the matched triangle an edge belongs to, if the
    /// triangle was not degenerate.
    pub fn third_vertex(&self, edge: &Edge) -> Option<u32> {
        let tri = self.built_triangles[edge.triangle? as usize];
        let mut rest = tri.iter().filter(|&&x| x != edge.u && x != edge.v);
        let w = *rest.next()?;
        rest.next().is_none().then_some(w)
    }

    /// One `u v kind` line per edge, nodes 0-indexed.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.edges {
            let kind = match e.kind {
                EdgeKind::Single => "single",
                EdgeKind::Triangle => "triangle",
            };
            writeln!(out, "{} {} {}", e.u, e.v, kind)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct RawEdge {
    u: u32,
    v: u32,
    kind: EdgeKind,
    triangle: Option<u32>,
}

fn erase_uniform<R: Rng>(list: &mut Vec<u32>, count: usize, rng: &mut R) {
    for _ in 0..count {
        let i = rng.random_range(0..list.len());
        list.swap_remove(i);
    }
}

/// Matches half-edges by shuffling the single and triangle lists, then
/// erases self-loops and parallel edges. Deterministic in `seed`.
pub fn build_graph(seq: &DegreeSequence, seed: u64) -> (CmcGraph, GenerationReport) {
    let n = seq.len();
    let mut singles: Vec<u32> = Vec::new();
    let mut triangles: Vec<u32> = Vec::new();
    for (i, d) in seq.entries.iter().enumerate() {
        let i = i as u32;
        singles.extend(std::iter::repeat_n(i, d.k_s as usize));
        triangles.extend(std::iter::repeat_n(i, d.k_delta as usize));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GenerationReport::default();
    let odd = singles.len() % 2;
    erase_uniform(&mut singles, odd, &mut rng);
    report.erased_single_halfedges = odd as u32;
    let extra = triangles.len() % 3;
    erase_uniform(&mut triangles, extra, &mut rng);
    report.erased_triangle_pairs = extra as u32;

    singles.shuffle(&mut rng);
    triangles.shuffle(&mut rng);

    let mut raw = Vec::with_capacity(singles.len() / 2 + triangles.len());
    for pair in singles.chunks_exact(2) {
        raw.push(RawEdge { u: pair[0], v: pair[1], kind: EdgeKind::Single, triangle: None });
    }
    let mut built = Vec::with_capacity(triangles.len() / 3);
    for (m, group) in triangles.chunks_exact(3).enumerate() {
        let (a, b, c) = (group[0], group[1], group[2]);
        built.push([a, b, c]);
        for (u, v) in [(a, b), (b, c), (a, c)] {
            raw.push(RawEdge { u, v, kind: EdgeKind::Triangle, triangle: Some(m as u32) });
        }
    }

    let (graph, (self_loops, merged)) = CmcGraph::assemble(n, raw, built);
    report.self_loops_removed = self_loops;
    report.multi_edges_merged = merged;
    (graph, report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusteringStats {
    pub ordered_wedges: u64,
    pub ordered_triangles: u64,
    pub coefficient: Option<f64>,
}

/// Fraction of ordered wedges that close into triangles.
pub fn clustering_empirical(g: &CmcGraph) -> ClusteringStats {
    let mut wedges = 0u64;
    let mut triangles = 0u64;
    for u in 0..g.n() as u32 {
        let nu = g.neighbors(u);
        let d = nu.len() as u64;
        wedges += d * d.saturating_sub(1);
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = g.neighbors(v);
            // count common neighbours w > v
            let mut a = nu.partition_point(|&x| x <= v);
            let mut b = nv.partition_point(|&x| x <= v);
            while a < nu.len() && b < nv.len() {
                match nu[a].cmp(&nv[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        triangles += 1;
                        a += 1;
                        b += 1;
                    }
                }
            }
        }
    }
    let ordered_triangles = 6 * triangles;
    ClusteringStats {
        ordered_wedges: wedges,
        ordered_triangles,
        coefficient: (wedges > 0).then(|| ordered_triangles as f64 / wedges as f64),
    }
}

/// Large-graph limit `E(2Δ) / (E((2Δ+S)²) − E(2Δ+S))`.
pub fn clustering_asymptotic(dist: &DegreeDistribution) -> Result<f64> {
    let num = dist.expect(|d| 2.0 * f64::from(d.k_delta));
    let den = dist.expect(|d| {
        let t = f64::from(d.total());
        t * t - t
    });
    if den <= 0.0 {
        return Err(Error::Domain(
            "clustering is undefined when every degree is at most one".into(),
        ));
    }
    Ok(num / den)
}
