//! Unweighted shortest paths and connectivity.
//!
//! Exact per-pair distances come from plain BFS. Aggregate quantities that only
//! need the number of ordered pairs at each hop distance (efficiency, average
//! path length, removal damage) use [`DistanceCounter`], a bit-parallel BFS that
//! advances 256 sources per sweep.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Snapshot;

/// Distance marker for unreachable pairs.
pub const UNREACHABLE: u32 = u32::MAX;

/// Hop distances from one source; unreachable nodes hold [`UNREACHABLE`].
pub fn bfs_from(g: &Snapshot, source: usize) -> Result<Vec<u32>> {
    if source >= g.n() {
        return Err(Error::NodeOutOfRange {
            index: source,
            n: g.n(),
        });
    }
    let mut dist = vec![UNREACHABLE; g.n()];
    let mut queue = VecDeque::with_capacity(g.n());
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in g.neighbors(u) {
            let v = v as usize;
            if dist[v] == UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Row-major N×N hop-distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    data: Vec<u32>,
}

impl DistanceTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_reachable(&self, i: usize, j: usize) -> bool {
        self.get(i, j) != UNREACHABLE
    }
}

/// BFS from every source. Rows are filled in parallel; the table does not
/// depend on the worker count.
pub fn all_pairs_distances(g: &Snapshot) -> DistanceTable {
    let n = g.n();
    let mut data = vec![UNREACHABLE; n * n];
    if n > 0 {
        data.par_chunks_mut(n).enumerate().for_each(|(s, row)| {
            let dist = bfs_from(g, s).expect("source in range");
            row.copy_from_slice(&dist);
        });
    }
    DistanceTable { n, data }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component label per node. Labels are numbered in order of each
    /// component's smallest node index.
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    pub edge_counts: Vec<usize>,
    /// Label of the largest component (ties go to the lowest label, i.e. the
    /// component with the smallest node index). `None` for the empty graph.
    pub largest: Option<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn largest_nodes(&self) -> usize {
        self.largest.map_or(0, |c| self.sizes[c])
    }

    pub fn largest_edges(&self) -> usize {
        self.largest.map_or(0, |c| self.edge_counts[c])
    }

    /// Node indices of the largest component in ascending order.
    pub fn largest_members(&self) -> Vec<usize> {
        match self.largest {
            Some(c) => (0..self.labels.len())
                .filter(|&i| self.labels[i] == c)
                .collect(),
            None => Vec::new(),
        }
    }
}

pub fn connected_components(g: &Snapshot) -> Components {
    let n = g.n();
    let mut labels = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        let c = sizes.len();
        labels[start] = c;
        stack.push(start);
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in g.neighbors(u) {
                let v = v as usize;
                if labels[v] == usize::MAX {
                    labels[v] = c;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    let mut edge_counts = vec![0; sizes.len()];
    for &(u, _) in g.edges() {
        edge_counts[labels[u as usize]] += 1;
    }
    let mut largest = None;
    for (c, &s) in sizes.iter().enumerate() {
        if largest.map_or(true, |l: usize| s > sizes[l]) {
            largest = Some(c);
        }
    }
    Components {
        labels,
        sizes,
        edge_counts,
        largest,
    }
}

/// Largest finite hop distance inside the largest connected component.
pub fn diameter(g: &Snapshot) -> Result<u32> {
    if g.n() == 0 {
        return Err(Error::undefined("diameter", "graph has no nodes"));
    }
    let members = connected_components(g).largest_members();
    let ecc = members
        .par_iter()
        .map(|&s| {
            bfs_from(g, s)
                .expect("member in range")
                .into_iter()
                .filter(|&d| d != UNREACHABLE)
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    Ok(ecc)
}

/// Number of ordered node pairs at each hop distance. `counts[d]` is the
/// number of ordered pairs `(i, j)`, `i != j`, with `d(i, j) = d`; index 0 is
/// always zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DistanceCounts {
    pub counts: Vec<u64>,
}

impl DistanceCounts {
    /// Σ 1/d over reachable ordered pairs.
    pub fn reciprocal_sum(&self) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, &c)| c as f64 / d as f64)
            .sum()
    }

    /// Σ d over reachable ordered pairs.
    pub fn distance_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(d, &c)| d as u64 * c)
            .sum()
    }

    pub fn reachable_pairs(&self) -> u64 {
        self.counts.iter().sum()
    }
}

const WORDS: usize = 4;
const LANES: usize = WORDS * 64;
type Lane = [u64; WORDS];

/// Reusable scratch space for bit-parallel BFS over a CSR adjacency.
#[derive(Debug, Default, Clone)]
pub struct DistanceCounter {
    visited: Vec<Lane>,
    frontier: Vec<Lane>,
    next: Vec<Lane>,
}

impl DistanceCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&mut self, g: &Snapshot) -> DistanceCounts {
        let (offsets, targets) = g.csr();
        let mut out = DistanceCounts::default();
        self.count_csr(offsets, targets, &mut out.counts);
        out
    }

    /// Fills `counts` (cleared first) for the graph given as CSR arrays.
    pub(crate) fn count_csr(&mut self, offsets: &[u32], targets: &[u32], counts: &mut Vec<u64>) {
        counts.clear();
        counts.push(0);
        let n = offsets.len().saturating_sub(1);
        if n == 0 {
            return;
        }
        self.visited.resize(n, [0; WORDS]);
        self.frontier.resize(n, [0; WORDS]);
        self.next.resize(n, [0; WORDS]);

        for base in (0..n).step_by(LANES) {
            let width = LANES.min(n - base);
            let mut full: Lane = [0; WORDS];
            for b in 0..width {
                full[b / 64] |= 1 << (b % 64);
            }
            self.visited.fill([0; WORDS]);
            self.frontier.fill([0; WORDS]);
            for b in 0..width {
                let bit = 1u64 << (b % 64);
                self.visited[base + b][b / 64] |= bit;
                self.frontier[base + b][b / 64] |= bit;
            }

            let mut depth = 0usize;
            loop {
                depth += 1;
                let mut found = 0u64;
                for v in 0..n {
                    let seen = self.visited[v];
                    if seen == full {
                        self.next[v] = [0; WORDS];
                        continue;
                    }
                    let mut acc: Lane = [0; WORDS];
                    for &u in &targets[offsets[v] as usize..offsets[v + 1] as usize] {
                        let f = &self.frontier[u as usize];
                        for w in 0..WORDS {
                            acc[w] |= f[w];
                        }
                    }
                    for w in 0..WORDS {
                        acc[w] &= !seen[w];
                        found += acc[w].count_ones() as u64;
                    }
                    self.next[v] = acc;
                }
                if found == 0 {
                    break;
                }
                if counts.len() <= depth {
                    counts.resize(depth + 1, 0);
                }
                counts[depth] += found;
                for v in 0..n {
                    let nx = self.next[v];
                    let seen = &mut self.visited[v];
                    for w in 0..WORDS {
                        seen[w] |= nx[w];
                    }
                }
                std::mem::swap(&mut self.frontier, &mut self.next);
            }
        }
    }
}

/// Pair-distance histogram of `g`.
pub fn distance_counts(g: &Snapshot) -> DistanceCounts {
    DistanceCounter::new().count(g)
}
