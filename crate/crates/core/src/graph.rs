//! Immutable simple undirected graphs.
//!
//! A [`Snapshot`] stores its adjacency in compressed sparse row form. Node
//! indices are dense (`0..n`) and fixed at construction, so removal sets and
//! partitions can be expressed as plain index lists. Every adjacency slot also
//! records the index of the edge it belongs to; edges are kept sorted as
//! `(u, v)` pairs with `u < v`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    year: Option<i32>,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    slot_edge: Vec<u32>,
    edges: Vec<(u32, u32)>,
    edge_labels: Vec<String>,
}

/// A parallel edge dropped while assembling a snapshot: `(kept, dropped)` labels.
pub type CollapsedEdge = (String, String);

impl Snapshot {
    /// Graph on `n` nodes whose ids are their decimal indices.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new((0..n).map(|i| i.to_string()).collect(), edges)
    }

    /// Graph with explicit node ids. Duplicate edges collapse silently; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn new<I>(ids: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let labeled = edges
            .into_iter()
            .map(|(u, v)| {
                let label = match (ids.get(u), ids.get(v)) {
                    (Some(a), Some(b)) if u <= v => format!("{a}-{b}"),
                    (Some(a), Some(b)) => format!("{b}-{a}"),
                    _ => String::new(),
                };
                (u, v, label)
            })
            .collect();
        Self::assemble(ids, labeled).map(|(g, _)| g)
    }

    /// Builds the CSR representation. Edges are deduplicated on their endpoint
    /// pair, keeping the first label seen; the dropped duplicates are returned.
    pub(crate) fn assemble(
        ids: Vec<String>,
        edges: Vec<(usize, usize, String)>,
    ) -> Result<(Self, Vec<CollapsedEdge>)> {
        let n = ids.len();
        if n > u32::MAX as usize {
            return Err(Error::InvalidParams(format!("{n} nodes exceed u32 indexing")));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "node",
                    id: id.clone(),
                });
            }
        }

        let mut unique: BTreeMap<(u32, u32), String> = BTreeMap::new();
        let mut collapsed = Vec::new();
        for (u, v, label) in edges {
            if u >= n {
                return Err(Error::NodeOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(Error::NodeOutOfRange { index: v, n });
            }
            if u == v {
                return Err(Error::InvalidParams(format!(
                    "self-loop on node `{}`",
                    ids[u]
                )));
            }
            let key = (u.min(v) as u32, u.max(v) as u32);
            match unique.get(&key) {
                Some(kept) => collapsed.push((kept.clone(), label)),
                None => {
                    unique.insert(key, label);
                }
            }
        }

        let mut degree = vec![0u32; n];
        for &(u, v) in unique.keys() {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        for d in &degree {
            let last = *offsets.last().unwrap();
            offsets.push(last + d);
        }
        let slots = *offsets.last().unwrap() as usize;
        let mut targets = vec![0u32; slots];
        let mut slot_edge = vec![0u32; slots];
        let mut cursor: Vec<u32> = offsets[..n].to_vec();
        let mut edge_list = Vec::with_capacity(unique.len());
        let mut edge_labels = Vec::with_capacity(unique.len());
        // Iterating sorted (u, v) pairs fills each row in ascending neighbor order.
        for (e, ((u, v), label)) in unique.into_iter().enumerate() {
            for (a, b) in [(u, v), (v, u)] {
                let slot = cursor[a as usize] as usize;
                targets[slot] = b;
                slot_edge[slot] = e as u32;
                cursor[a as usize] += 1;
            }
            edge_list.push((u, v));
            edge_labels.push(label);
        }
        debug_assert!((0..n).all(|i| {
            targets[offsets[i] as usize..offsets[i + 1] as usize]
                .windows(2)
                .all(|w| w[0] < w[1])
        }));

        let g = Snapshot {
            year: None,
            ids,
            index,
            offsets,
            targets,
            slot_edge,
            edges: edge_list,
            edge_labels,
        };
        Ok((g, collapsed))
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn year(&self) -> Option<i32> {
        self.year
    }

    /// Node count N.
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Edge count E.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn degree(&self, node: usize) -> usize {
        (self.offsets[node + 1] - self.offsets[node]) as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.degree(i)).collect()
    }

    /// ⟨k⟩ = 2E / N.
    pub fn avg_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            2.0 * self.m() as f64 / self.n() as f64
        }
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.targets[self.offsets[node] as usize..self.offsets[node + 1] as usize]
    }

    /// `(neighbor, edge index)` pairs around `node`.
    pub fn incident(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.offsets[node] as usize..self.offsets[node + 1] as usize;
        self.targets[range.clone()]
            .iter()
            .zip(&self.slot_edge[range])
            .map(|(&t, &e)| (t as usize, e as usize))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n() || v >= self.n() {
            return None;
        }
        let key = (u.min(v) as u32, u.max(v) as u32);
        self.edges.binary_search(&key).ok()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.edges[e];
        (u as usize, v as usize)
    }

    /// Identifier of edge `e`: the dataset line id for parsed snapshots, or
    /// `"<from>-<to>"` for generated graphs.
    pub fn edge_label(&self, e: usize) -> &str {
        &self.edge_labels[e]
    }

    pub(crate) fn csr(&self) -> (&[u32], &[u32]) {
        (&self.offsets, &self.targets)
    }

    pub(crate) fn slot_edges(&self) -> &[u32] {
        &self.slot_edge
    }

    /// Subgraph induced by `nodes` (any order, no duplicates). Node `i` of the
    /// result corresponds to `nodes[i]`; edge labels and the year carry over.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Snapshot> {
        let mut map = vec![u32::MAX; self.n()];
        for (new, &old) in nodes.iter().enumerate() {
            if old >= self.n() {
                return Err(Error::NodeOutOfRange {
                    index: old,
                    n: self.n(),
                });
            }
            map[old] = new as u32;
        }
        let ids = nodes.iter().map(|&i| self.ids[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(e, &(u, v))| {
                let (a, b) = (map[u as usize], map[v as usize]);
                (a != u32::MAX && b != u32::MAX)
                    .then(|| (a as usize, b as usize, self.edge_labels[e].clone()))
            })
            .collect();
        let (mut g, _) = Self::assemble(ids, edges)?;
        g.year = self.year;
        Ok(g)
    }

    /// Same node set with the flagged edges dropped.
    pub(crate) fn without_edges(&self, dropped: &[bool]) -> Result<Snapshot> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(e, _)| !dropped[*e])
            .map(|(e, &(u, v))| (u as usize, v as usize, self.edge_labels[e].clone()))
            .collect();
        let (mut g, _) = Self::assemble(self.ids.clone(), edges)?;
        g.year = self.year;
        Ok(g)
    }

    /// Byte-stable export with ids in lexicographic order.
    pub fn export(&self) -> SnapshotExport {
        let mut nodes = self.ids.clone();
        nodes.sort();
        let mut edges: Vec<[String; 2]> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (&self.ids[u as usize], &self.ids[v as usize]);
                if a <= b {
                    [a.clone(), b.clone()]
                } else {
                    [b.clone(), a.clone()]
                }
            })
            .collect();
        edges.sort();
        SnapshotExport {
            year: self.year,
            nodes,
            edges,
        }
    }
}

/// JSON form of a snapshot: `{year, nodes:[ids], edges:[[from,to]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotExport {
    pub year: Option<i32>,
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl SnapshotExport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn into_snapshot(self) -> Result<Snapshot> {
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for [a, b] in &self.edges {
            let lookup = |id: &String| {
                index.get(id.as_str()).copied().ok_or_else(|| Error::DanglingEndpoint {
                    edge: format!("{a}-{b}"),
                    node: id.clone(),
                })
            };
            edges.push((lookup(a)?, lookup(b)?));
        }
        let g = Snapshot::new(self.nodes.clone(), edges)?;
        Ok(match self.year {
            Some(y) => g.with_year(y),
            None => g,
        })
    }
}
