//! Synthetic temporal datasets.
//!
//! [`growing_grid`] produces an invented grid history so the timeline pipeline
//! can be exercised without any real network data. It is not a model of any
//! actual system. Each year a batch of substations is built, each wired to one
//! existing substation and, with a probability that rises over time, to a
//! neighbor of it as well (closing a triangle). Every few years extra lines
//! close triangles elsewhere and an occasional line is retired.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::{EdgeRecord, NodeRecord, TemporalDataset};
use crate::error::{Error, Result};
use crate::graph::Snapshot;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthParams {
    pub first_year: i32,
    pub last_year: i32,
    /// Substations present in the first year, wired as a path.
    pub initial_nodes: usize,
    pub nodes_per_year: usize,
    /// Probability of a second, triangle-closing line at the start and end of the period.
    pub second_link: (f64, f64),
    /// Every this many years, close triangles elsewhere.
    pub closure_every: usize,
    pub closures: usize,
    /// Every this many years, retire one line that is not a bridge.
    pub retire_every: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            first_year: 1949,
            last_year: 2019,
            initial_nodes: 12,
            nodes_per_year: 5,
            second_link: (0.05, 0.6),
            closure_every: 3,
            closures: 2,
            retire_every: 7,
        }
    }
}

pub fn growing_grid(p: &GrowthParams, seed: u64) -> Result<TemporalDataset> {
    if p.last_year < p.first_year || p.initial_nodes < 2 || p.closure_every == 0 {
        return Err(Error::InvalidParams(format!("invalid growth parameters {p:?}")));
    }
    let mut rng = seeded(seed);
    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut edges: Vec<EdgeRecord> = Vec::new();
    // Live adjacency of the history so far: (neighbor, edge record index).
    let mut adj: Vec<Vec<(usize, usize)>> = Vec::new();

    let node_id = |i: usize| format!("S{i:04}");
    let add_node = |nodes: &mut Vec<NodeRecord>, adj: &mut Vec<Vec<(usize, usize)>>, year| {
        let i = nodes.len();
        let mut rec = NodeRecord::new(node_id(i), year, None);
        rec.name = format!("Substation {i}");
        nodes.push(rec);
        adj.push(Vec::new());
        i
    };
    let add_edge = |edges: &mut Vec<EdgeRecord>, adj: &mut Vec<Vec<(usize, usize)>>, u: usize, v: usize, year| {
        if u == v || adj[u].iter().any(|&(w, _)| w == v) {
            return false;
        }
        let e = edges.len();
        edges.push(EdgeRecord::new(format!("L{e:04}"), node_id(u), node_id(v), year, None));
        adj[u].push((v, e));
        adj[v].push((u, e));
        true
    };

    for _ in 0..p.initial_nodes {
        add_node(&mut nodes, &mut adj, p.first_year);
    }
    for i in 1..p.initial_nodes {
        add_edge(&mut edges, &mut adj, i - 1, i, p.first_year);
    }

    let span = (p.last_year - p.first_year).max(1) as f64;
    for year in p.first_year + 1..=p.last_year {
        let t = (year - p.first_year) as f64 / span;
        let second = p.second_link.0 + (p.second_link.1 - p.second_link.0) * t;
        for _ in 0..p.nodes_per_year {
            let anchor = rng.gen_range(0..nodes.len());
            let v = add_node(&mut nodes, &mut adj, year);
            add_edge(&mut edges, &mut adj, anchor, v, year);
            if rng.gen_bool(second) {
                let options: Vec<usize> = adj[anchor].iter().map(|&(w, _)| w).filter(|&w| w != v).collect();
                if let Some(&w) = options.choose(&mut rng) {
                    add_edge(&mut edges, &mut adj, w, v, year);
                }
            }
        }
        let elapsed = (year - p.first_year) as usize;
        if elapsed % p.closure_every == 0 {
            for _ in 0..p.closures {
                let hub = rng.gen_range(0..nodes.len());
                let nbrs: Vec<usize> = adj[hub].iter().map(|&(w, _)| w).collect();
                if nbrs.len() >= 2 {
                    let pick: Vec<&usize> = nbrs.choose_multiple(&mut rng, 2).collect();
                    add_edge(&mut edges, &mut adj, *pick[0], *pick[1], year);
                }
            }
        }
        if p.retire_every > 0 && elapsed % p.retire_every == 0 {
            retire_cycle_edge(&mut rng, &mut edges, &mut adj, year);
        }
    }
    TemporalDataset::new(nodes, edges)
}

/// Retires one randomly chosen line that lies on a cycle, so no substation is cut off.
fn retire_cycle_edge(
    rng: &mut impl Rng,
    edges: &mut [EdgeRecord],
    adj: &mut [Vec<(usize, usize)>],
    year: i32,
) {
    let live: Vec<(usize, usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, row)| row.iter().filter(move |&&(v, _)| u < v).map(move |&(v, e)| (u, v, e)))
        .collect();
    let pairs: Vec<(usize, usize)> = live.iter().map(|&(u, v, _)| (u, v)).collect();
    let Ok(g) = Snapshot::from_edges(adj.len(), pairs) else {
        return;
    };
    let base = crate::paths::connected_components(&g).count();
    let mut order: Vec<usize> = (0..live.len()).collect();
    order.shuffle(rng);
    for i in order {
        let (u, v, e) = live[i];
        let mut dropped = vec![false; g.m()];
        dropped[g.edge_index(u, v).expect("live edge")] = true;
        let Ok(h) = g.without_edges(&dropped) else {
            continue;
        };
        if crate::paths::connected_components(&h).count() == base {
            edges[e].lifetime.decommissioned = Some(year);
            adj[u].retain(|&(w, _)| w != v);
            adj[v].retain(|&(w, _)| w != u);
            return;
        }
    }
}
