//! Seeded graph generators used as fixtures.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Snapshot;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Ring lattice: every node linked to its `k / 2` nearest neighbors on each side.
    Ring { n: usize, k: usize },
    Path { n: usize },
    /// Node 0 is the hub.
    Star { n: usize },
    Complete { n: usize },
    /// G(n, p).
    ErdosRenyi { n: usize, p: f64 },
    /// G(n, m): exactly `m` edges drawn uniformly.
    ErdosRenyiM { n: usize, m: usize },
    /// Growth with `m` degree-proportional attachments per new node, seeded
    /// by a complete graph on `m + 1` nodes.
    PreferentialAttachment { n: usize, m: usize },
}

pub fn generate(model: Model, seed: u64) -> Result<Snapshot> {
    let mut rng = seeded(seed);
    let (n, edges) = match model {
        Model::Ring { n, k } => {
            if k < 2 || k % 2 != 0 || k >= n {
                return Err(Error::InvalidParams(format!(
                    "ring needs an even k with 2 <= k < n, got n={n}, k={k}"
                )));
            }
            let edges = (0..n)
                .flat_map(|i| (1..=k / 2).map(move |j| (i, (i + j) % n)))
                .collect();
            (n, edges)
        }
        Model::Path { n } => {
            require_nodes(n, 1)?;
            (n, (1..n).map(|i| (i - 1, i)).collect())
        }
        Model::Star { n } => {
            require_nodes(n, 1)?;
            (n, (1..n).map(|i| (0, i)).collect())
        }
        Model::Complete { n } => {
            require_nodes(n, 1)?;
            (n, complete_edges(n))
        }
        Model::ErdosRenyi { n, p } => {
            require_nodes(n, 1)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("p must lie in [0, 1], got {p}")));
            }
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
            (n, edges)
        }
        Model::ErdosRenyiM { n, m } => {
            require_nodes(n, 1)?;
            let max = n * (n - 1) / 2;
            if m > max {
                return Err(Error::InvalidParams(format!(
                    "{m} edges do not fit in a simple graph on {n} nodes"
                )));
            }
            (n, sample_edges(&mut rng, n, m))
        }
        Model::PreferentialAttachment { n, m } => {
            if m < 1 || n < m + 1 {
                return Err(Error::InvalidParams(format!(
                    "preferential attachment needs m >= 1 and n >= m + 1, got n={n}, m={m}"
                )));
            }
            (n, attach(&mut rng, n, m))
        }
    };
    Snapshot::from_edges(n, edges)
}

fn require_nodes(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParams(format!("need at least {min} nodes, got {n}")));
    }
    Ok(())
}

fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn sample_edges(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let max = n * (n - 1) / 2;
    if 2 * m > max {
        // Dense request: shuffle-select from the full pair list instead of rejecting.
        let mut all = complete_edges(n);
        for i in 0..m {
            let j = rng.gen_range(i..all.len());
            all.swap(i, j);
        }
        all.truncate(m);
        all.sort_unstable();
        return all;
    }
    let mut chosen = BTreeSet::new();
    let mut order = Vec::with_capacity(m);
    while order.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if chosen.insert(key) {
            order.push(key);
        }
    }
    order
}

fn attach(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut edges = complete_edges(m + 1);
    // Each node appears once per incident edge, so a uniform draw is degree-proportional.
    let mut ends: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut picked = Vec::with_capacity(m);
    for t in m + 1..n {
        picked.clear();
        while picked.len() < m {
            let target = ends[rng.gen_range(0..ends.len())];
            if !picked.contains(&target) {
                picked.push(target);
            }
        }
        for &target in &picked {
            edges.push((target, t));
            ends.push(target);
            ends.push(t);
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_degrees() {
        let g = generate(Model::Star { n: 4 }, 0).unwrap();
        let mut d = g.degrees();
        d.sort();
        assert_eq!(d, [1, 1, 1, 3]);
    }

    #[test]
    fn er_with_p_one_is_complete() {
        let g = generate(Model::ErdosRenyi { n: 50, p: 1.0 }, 7).unwrap();
        assert_eq!(g.m(), 50 * 49 / 2);
    }

    #[test]
    fn preferential_attachment_is_deterministic() {
        let a = generate(Model::PreferentialAttachment { n: 200, m: 2 }, 11).unwrap();
        let b = generate(Model::PreferentialAttachment { n: 200, m: 2 }, 11).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.m(), 3 + 2 * (200 - 3));
        let c = generate(Model::PreferentialAttachment { n: 200, m: 2 }, 12).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn gnm_has_exact_edge_count() {
        let g = generate(Model::ErdosRenyiM { n: 400, m: 774 }, 3).unwrap();
        assert_eq!((g.n(), g.m()), (400, 774));
        let dense = generate(Model::ErdosRenyiM { n: 10, m: 40 }, 3).unwrap();
        assert_eq!(dense.m(), 40);
    }

    #[test]
    fn ring_lattice_is_regular() {
        let g = generate(Model::Ring { n: 200, k: 6 }, 0).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 6));
        assert_eq!(g.m(), 600);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(generate(Model::Ring { n: 5, k: 3 }, 0).is_err());
        assert!(generate(Model::Path { n: 0 }, 0).is_err());
        assert!(generate(Model::ErdosRenyi { n: 5, p: 1.5 }, 0).is_err());
        assert!(generate(Model::ErdosRenyiM { n: 4, m: 7 }, 0).is_err());
        assert!(generate(Model::PreferentialAttachment { n: 2, m: 2 }, 0).is_err());
        assert!(generate(Model::PreferentialAttachment { n: 5, m: 0 }, 0).is_err());
    }
}
