//! Community partitions and greedy agglomerative modularity maximization.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Snapshot;
use crate::metrics::modularity;
use crate::rng::derive_seed;

/// Assignment of every node to one community. Labels are contiguous
/// (`0..count`) and numbered in order of first appearance by node index, so two
/// partitions that differ only by community renaming compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    labels: Vec<usize>,
    count: usize,
}

impl Partition {
    pub fn from_labels(raw: Vec<usize>) -> Self {
        let mut rename = BTreeMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = rename.len();
                *rename.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            count: rename.len(),
        }
    }

    pub fn single(n: usize) -> Self {
        Self::from_labels(vec![0; n])
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Members of each community, in label order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Greedy agglomerative modularity maximization.
///
/// Starts from singletons and repeatedly merges the pair of adjacent
/// communities with the largest modularity gain until no merge improves Q.
/// Gains are compared exactly in integer form (`2E·w_ij − d_i·d_j`); equal gains
/// are ordered by a key derived from `seed` and the two communities' smallest
/// node indices.
pub fn detect_communities(g: &Snapshot, seed: u64) -> Result<Partition> {
    let n = g.n();
    if g.m() == 0 {
        return Err(Error::undefined("community detection", "graph has no edges"));
    }
    let two_m = 2 * g.m() as i128;

    // Slot i hosts the community whose smallest node is i.
    let mut links: Vec<BTreeMap<usize, i128>> = vec![BTreeMap::new(); n];
    for &(u, v) in g.edges() {
        *links[u as usize].entry(v as usize).or_default() += 1;
        *links[v as usize].entry(u as usize).or_default() += 1;
    }
    let mut degree: Vec<i128> = (0..n).map(|i| g.degree(i) as i128).collect();
    let mut owner: Vec<usize> = (0..n).collect();
    let mut alive = vec![true; n];

    loop {
        let mut best: Option<(i128, u64, usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for (&j, &w) in links[i].range(i + 1..) {
                let gain = two_m * w - degree[i] * degree[j];
                if gain <= 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bg, bk, _, _)) => {
                        gain > bg || (gain == bg && derive_seed(seed, &[i as u64, j as u64]) < bk)
                    }
                };
                if better {
                    best = Some((gain, derive_seed(seed, &[i as u64, j as u64]), i, j));
                }
            }
        }
        let Some((_, _, keep, absorb)) = best else {
            break;
        };

        let absorbed = std::mem::take(&mut links[absorb]);
        for (k, w) in absorbed {
            links[k].remove(&absorb);
            if k != keep {
                *links[keep].entry(k).or_default() += w;
                *links[k].entry(keep).or_default() += w;
            }
        }
        links[keep].remove(&absorb);
        degree[keep] += degree[absorb];
        alive[absorb] = false;
        for o in owner.iter_mut() {
            if *o == absorb {
                *o = keep;
            }
        }
    }

    let partition = Partition::from_labels(owner);
    if modularity(g, &partition)? < 0.0 {
        return Ok(Partition::single(n));
    }
    Ok(partition)
}
