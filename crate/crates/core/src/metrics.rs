//! Per-snapshot complex-network metrics.

use rayon::prelude::*;
use serde::Serialize;

use crate::community::{detect_communities, Partition};
use crate::error::{Error, Result};
use crate::generate::{generate, Model};
use crate::graph::Snapshot;
use crate::paths::{connected_components, diameter, distance_counts};
use crate::rng::derive_seed;

/// Global efficiency: mean of 1/d(i, j) over all ordered pairs, unreachable
/// pairs contributing zero.
pub fn efficiency(g: &Snapshot) -> Result<f64> {
    let n = g.n();
    if n < 2 {
        return Err(Error::undefined("efficiency", format!("needs N >= 2, got {n}")));
    }
    let pairs = (n * (n - 1)) as f64;
    Ok(distance_counts(g).reciprocal_sum() / pairs)
}

/// Mean hop distance over reachable ordered pairs.
pub fn avg_path_length(g: &Snapshot) -> Result<f64> {
    let counts = distance_counts(g);
    let reachable = counts.reachable_pairs();
    if reachable == 0 {
        return Err(Error::undefined("average path length", "graph has no edges"));
    }
    Ok(counts.distance_sum() as f64 / reachable as f64)
}

/// Mean local clustering coefficient. Nodes of degree below 2 contribute 0.
pub fn clustering(g: &Snapshot) -> Result<f64> {
    let n = g.n();
    if n == 0 {
        return Err(Error::undefined("clustering", "graph has no nodes"));
    }
    let mut mark = vec![usize::MAX; n];
    let mut total = 0.0;
    for i in 0..n {
        let k = g.degree(i);
        if k < 2 {
            continue;
        }
        for &a in g.neighbors(i) {
            mark[a as usize] = i;
        }
        let mut links = 0usize;
        for &a in g.neighbors(i) {
            links += g
                .neighbors(a as usize)
                .iter()
                .filter(|&&b| b > a && mark[b as usize] == i)
                .count();
        }
        total += 2.0 * links as f64 / (k * (k - 1)) as f64;
    }
    Ok(total / n as f64)
}

/// Normalization of the modularity sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModularityNorm {
    /// Newman's null model, normalized by 2E.
    #[default]
    Standard,
    /// The same sum normalized by ⟨k⟩ in place of 2E (both in the prefactor and
    /// the null-model term). Kept for comparison only.
    AverageDegree,
}

pub fn modularity(g: &Snapshot, p: &Partition) -> Result<f64> {
    modularity_with(g, p, ModularityNorm::Standard)
}

pub fn modularity_with(g: &Snapshot, p: &Partition, norm: ModularityNorm) -> Result<f64> {
    if p.len() != g.n() {
        return Err(Error::PartitionMismatch {
            labels: p.len(),
            n: g.n(),
        });
    }
    if g.m() == 0 {
        return Err(Error::undefined("modularity", "graph has no edges"));
    }
    let c = p.count();
    let mut internal = vec![0u64; c];
    let mut degree_sum = vec![0u64; c];
    for &(u, v) in g.edges() {
        let (cu, cv) = (p.label(u as usize), p.label(v as usize));
        if cu == cv {
            internal[cu] += 1;
        }
        degree_sum[cu] += 1;
        degree_sum[cv] += 1;
    }
    let q = match norm {
        ModularityNorm::Standard => {
            let m = g.m() as f64;
            internal
                .iter()
                .zip(&degree_sum)
                .map(|(&e, &d)| e as f64 / m - (d as f64 / (2.0 * m)).powi(2))
                .sum()
        }
        ModularityNorm::AverageDegree => {
            let k = g.avg_degree();
            let adjacency: f64 = internal.iter().map(|&e| 2.0 * e as f64).sum();
            let null: f64 = degree_sum.iter().map(|&d| (d as f64).powi(2)).sum::<f64>() / k;
            (adjacency - null) / k
        }
    };
    Ok(q)
}

/// Reference model for the small-world coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaBaseline {
    /// C_rand = ⟨k⟩/N, L_rand = ln N / ln ⟨k⟩.
    #[default]
    Analytic,
    /// Averages over [`ENSEMBLE_SIZE`] seeded G(n, m) graphs with the same N and E.
    Ensemble,
}

pub const ENSEMBLE_SIZE: usize = 20;

/// σ = (C / C_rand) / (L / L_rand), evaluated on the largest connected component.
pub fn small_world_sigma(g: &Snapshot, baseline: SigmaBaseline, seed: u64) -> Result<f64> {
    let members = connected_components(g).largest_members();
    let core = g.induced_subgraph(&members)?;
    let n = core.n();
    let k = core.avg_degree();
    if n < 4 {
        return Err(Error::undefined(
            "small-world coefficient",
            format!("largest component has {n} nodes, needs at least 4"),
        ));
    }
    if k <= 1.0 {
        return Err(Error::undefined(
            "small-world coefficient",
            format!("mean degree {k:.3} <= 1 leaves the random baseline undefined"),
        ));
    }
    let c = clustering(&core)?;
    let l = avg_path_length(&core)?;
    let (c_rand, l_rand) = match baseline {
        SigmaBaseline::Analytic => (k / n as f64, (n as f64).ln() / k.ln()),
        SigmaBaseline::Ensemble => {
            let samples = (0..ENSEMBLE_SIZE as u64)
                .into_par_iter()
                .map(|s| {
                    let model = Model::ErdosRenyiM { n, m: core.m() };
                    let r = generate(model, derive_seed(seed, &[s]))?;
                    Ok((clustering(&r)?, avg_path_length(&r)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let len = samples.len() as f64;
            (
                samples.iter().map(|s| s.0).sum::<f64>() / len,
                samples.iter().map(|s| s.1).sum::<f64>() / len,
            )
        }
    };
    if c_rand == 0.0 {
        return Err(Error::undefined(
            "small-world coefficient",
            "random baseline has zero clustering",
        ));
    }
    Ok((c / c_rand) / (l / l_rand))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsOptions {
    /// Seed for community detection and ensemble baselines.
    pub seed: u64,
    pub sigma_baseline: SigmaBaseline,
    pub modularity_norm: ModularityNorm,
}

/// Network properties of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub year: i32,
    pub n: usize,
    pub m: usize,
    pub avg_degree: f64,
    pub diameter: u32,
    /// `None` when the snapshot has no edges.
    #[serde(rename = "Q")]
    pub modularity: Option<f64>,
    /// `None` when no pair of nodes is connected.
    #[serde(rename = "L")]
    pub avg_path_length: Option<f64>,
    #[serde(rename = "C")]
    pub clustering: f64,
    /// `None` when the largest component is too small or too sparse.
    pub sigma: Option<f64>,
    /// `None` for a single node.
    pub eff: Option<f64>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "year,n,m,avg_degree,diameter,Q,L,C,sigma,eff";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{},{},{},{:.6},{},{}",
            self.year,
            self.n,
            self.m,
            self.avg_degree,
            self.diameter,
            optional(self.modularity),
            optional(self.avg_path_length),
            self.clustering,
            optional(self.sigma),
            optional(self.eff)
        )
    }
}

/// Empty CSV field for an undefined value.
fn optional(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Turns an undefined-metric error into `None` with a warning.
fn defined(g: &Snapshot, r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::UndefinedMetric { .. }) => {
            match g.year() {
                Some(y) => log::warn!("{y}: {e}"),
                None => log::warn!("{e}"),
            }
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// All snapshot metrics. Metrics that are undefined for this graph are
/// reported as `None`; the call fails only for an empty graph.
pub fn compute_metrics(g: &Snapshot, opts: &MetricsOptions) -> Result<MetricsReport> {
    let modularity = if g.m() == 0 {
        defined(g, Err(Error::undefined("modularity", "graph has no edges")))?
    } else {
        let partition = detect_communities(g, opts.seed)?;
        defined(g, modularity_with(g, &partition, opts.modularity_norm))?
    };
    Ok(MetricsReport {
        year: g.year().unwrap_or(0),
        n: g.n(),
        m: g.m(),
        avg_degree: g.avg_degree(),
        diameter: diameter(g)?,
        modularity,
        avg_path_length: defined(g, avg_path_length(g))?,
        clustering: clustering(g)?,
        sigma: defined(g, small_world_sigma(g, opts.sigma_baseline, opts.seed))?,
        eff: defined(g, efficiency(g))?,
    })
}
