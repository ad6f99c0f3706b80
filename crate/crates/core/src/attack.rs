//! Simultaneous removal of nodes or edges and the resulting loss of efficiency.
//!
//! Damage is the relative efficiency drop `(eff₀ − eff_after) / eff₀`. Under the
//! default fixed-N convention the post-removal reciprocal-distance sum is divided
//! by the original `N(N − 1)`, so damage stays in `[0, 1]` and grows with the
//! removal set.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Snapshot;
use crate::paths::DistanceCounter;
use crate::rng::trial_stream;

/// Removal sizes of the standard campaign.
pub const STANDARD_SIZES: [usize; 6] = [1, 2, 5, 10, 15, 20];
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_BIN_WIDTH: f64 = 0.0099;
pub const DEFAULT_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Node,
    Edge,
}

impl ElementKind {
    pub fn count(self, g: &Snapshot) -> usize {
        match self {
            ElementKind::Node => g.n(),
            ElementKind::Edge => g.m(),
        }
    }

    /// Dataset-facing identifier of an element.
    pub fn label(self, g: &Snapshot, index: usize) -> String {
        match self {
            ElementKind::Node => g.id(index).to_string(),
            ElementKind::Edge => g.edge_label(index).to_string(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Node => "node",
            ElementKind::Edge => "edge",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node" | "nodes" => Ok(ElementKind::Node),
            "edge" | "edges" => Ok(ElementKind::Edge),
            other => Err(Error::InvalidParams(format!("unknown element kind `{other}`"))),
        }
    }
}

/// How post-removal efficiency is normalized after node removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Divide by the original `N(N − 1)`.
    #[default]
    FixedN,
    /// Divide by `N'(N' − 1)` over the surviving nodes. Can yield negative damage.
    ShrunkN,
}

/// Which edges count as disconnected after a removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisconnectionMeasure {
    /// Edges outside the largest surviving component.
    #[default]
    LargestComponent,
    /// Removed edges and edges incident to removed nodes only.
    IncidentEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DamageOptions {
    pub normalization: Normalization,
    pub disconnection: DisconnectionMeasure,
}

/// Outcome of one removal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DamageOutcome {
    /// Δeff / eff₀.
    pub damage: f64,
    /// Fraction of the original edges counted as disconnected.
    pub disconnection: f64,
}

/// A graph after removal, with the original index of every surviving node.
#[derive(Debug, Clone, PartialEq)]
pub struct Removal {
    pub graph: Snapshot,
    pub original_index: Vec<usize>,
}

fn validate_targets(g: &Snapshot, kind: ElementKind, targets: &[usize]) -> Result<()> {
    let count = kind.count(g);
    let mut seen = vec![false; count];
    for &t in targets {
        if t >= count {
            return Err(Error::InvalidTarget {
                target: t,
                message: format!("only {count} {kind}s exist"),
            });
        }
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::InvalidTarget {
                target: t,
                message: "listed more than once".into(),
            });
        }
    }
    Ok(())
}

pub fn remove(g: &Snapshot, kind: ElementKind, targets: &[usize]) -> Result<Removal> {
    validate_targets(g, kind, targets)?;
    match kind {
        ElementKind::Node => {
            let mut dropped = vec![false; g.n()];
            for &t in targets {
                dropped[t] = true;
            }
            let surviving: Vec<usize> = (0..g.n()).filter(|&i| !dropped[i]).collect();
            Ok(Removal {
                graph: g.induced_subgraph(&surviving)?,
                original_index: surviving,
            })
        }
        ElementKind::Edge => {
            let mut dropped = vec![false; g.m()];
            for &t in targets {
                dropped[t] = true;
            }
            Ok(Removal {
                graph: g.without_edges(&dropped)?,
                original_index: (0..g.n()).collect(),
            })
        }
    }
}

/// Damage of one removal set under the default conventions.
pub fn damage(g: &Snapshot, kind: ElementKind, targets: &[usize]) -> Result<DamageOutcome> {
    damage_with(g, kind, targets, DamageOptions::default())
}

pub fn damage_with(
    g: &Snapshot,
    kind: ElementKind,
    targets: &[usize],
    opts: DamageOptions,
) -> Result<DamageOutcome> {
    validate_targets(g, kind, targets)?;
    let eval = DamageEvaluator::new(g, opts)?;
    let mut scratch = eval.scratch();
    Ok(eval.evaluate(kind, targets, &mut scratch))
}

/// Evaluates many removal sets against one baseline graph.
#[derive(Debug, Clone)]
pub struct DamageEvaluator<'g> {
    g: &'g Snapshot,
    base_sum: f64,
    opts: DamageOptions,
}

/// Per-worker buffers for [`DamageEvaluator::evaluate`].
#[derive(Debug, Default)]
pub struct Scratch {
    node_alive: Vec<bool>,
    edge_alive: Vec<bool>,
    remap: Vec<u32>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    counts: Vec<u64>,
    counter: DistanceCounter,
    labels: Vec<u32>,
    stack: Vec<u32>,
}

impl<'g> DamageEvaluator<'g> {
    pub fn new(g: &'g Snapshot, opts: DamageOptions) -> Result<Self> {
        if g.m() == 0 {
            return Err(Error::undefined(
                "damage",
                "initial efficiency is zero (graph has no edges)",
            ));
        }
        let base_sum = DistanceCounter::new().count(g).reciprocal_sum();
        Ok(Self { g, base_sum, opts })
    }

    pub fn graph(&self) -> &Snapshot {
        self.g
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::default()
    }

    /// Targets must be distinct and in range.
    pub fn evaluate(&self, kind: ElementKind, targets: &[usize], s: &mut Scratch) -> DamageOutcome {
        let g = self.g;
        let n = g.n();
        s.node_alive.clear();
        s.node_alive.resize(n, true);
        s.edge_alive.clear();
        s.edge_alive.resize(g.m(), true);
        match kind {
            ElementKind::Node => targets.iter().for_each(|&t| s.node_alive[t] = false),
            ElementKind::Edge => targets.iter().for_each(|&t| s.edge_alive[t] = false),
        }

        // Compact CSR of the surviving graph.
        s.remap.clear();
        s.remap.resize(n, u32::MAX);
        let mut alive = 0u32;
        for i in 0..n {
            if s.node_alive[i] {
                s.remap[i] = alive;
                alive += 1;
            }
        }
        s.offsets.clear();
        s.targets.clear();
        s.offsets.push(0);
        let (offsets, nbrs) = g.csr();
        let slot_edges = g.slot_edges();
        for i in 0..n {
            if !s.node_alive[i] {
                continue;
            }
            for slot in offsets[i] as usize..offsets[i + 1] as usize {
                let v = nbrs[slot] as usize;
                if s.node_alive[v] && s.edge_alive[slot_edges[slot] as usize] {
                    s.targets.push(s.remap[v]);
                }
            }
            s.offsets.push(s.targets.len() as u32);
        }

        s.counter.count_csr(&s.offsets, &s.targets, &mut s.counts);
        let after: f64 = s
            .counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, &c)| c as f64 / d as f64)
            .sum();
        let damage = match self.opts.normalization {
            Normalization::FixedN => (self.base_sum - after) / self.base_sum,
            Normalization::ShrunkN => {
                let eff0 = self.base_sum / (n * (n - 1)) as f64;
                let n1 = alive as usize;
                let eff1 = if n1 >= 2 {
                    after / (n1 * (n1 - 1)) as f64
                } else {
                    0.0
                };
                (eff0 - eff1) / eff0
            }
        };

        let e0 = g.m() as f64;
        let disconnected = match self.opts.disconnection {
            DisconnectionMeasure::LargestComponent => {
                g.m() - largest_component_edges(&s.offsets, &s.targets, &mut s.labels, &mut s.stack)
            }
            DisconnectionMeasure::IncidentEdges => match kind {
                ElementKind::Edge => targets.len(),
                ElementKind::Node => g
                    .edges()
                    .iter()
                    .filter(|&&(u, v)| !s.node_alive[u as usize] || !s.node_alive[v as usize])
                    .count(),
            },
        };
        DamageOutcome {
            damage,
            disconnection: disconnected as f64 / e0,
        }
    }
}

/// Edge count of the largest component (ties to the one holding the smallest index).
fn largest_component_edges(
    offsets: &[u32],
    targets: &[u32],
    labels: &mut Vec<u32>,
    stack: &mut Vec<u32>,
) -> usize {
    let n = offsets.len() - 1;
    labels.clear();
    labels.resize(n, u32::MAX);
    let (mut best_size, mut best_slots) = (0usize, 0usize);
    let mut next = 0u32;
    for start in 0..n {
        if labels[start] != u32::MAX {
            continue;
        }
        labels[start] = next;
        stack.push(start as u32);
        let (mut size, mut slots) = (0usize, 0usize);
        while let Some(u) = stack.pop() {
            let u = u as usize;
            size += 1;
            let row = &targets[offsets[u] as usize..offsets[u + 1] as usize];
            slots += row.len();
            for &v in row {
                if labels[v as usize] == u32::MAX {
                    labels[v as usize] = next;
                    stack.push(v);
                }
            }
        }
        if size > best_size {
            best_size = size;
            best_slots = slots;
        }
        next += 1;
    }
    best_slots / 2
}

/// One Monte Carlo removal scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemovalScenario {
    pub kind: ElementKind,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub bin_width: f64,
}

impl RemovalScenario {
    pub fn new(kind: ElementKind, k: usize, trials: usize, seed: u64) -> Self {
        Self {
            kind,
            k,
            trials,
            seed,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

/// Removal size after capping: at most `N − 1` nodes or `E` edges.
pub fn effective_k(g: &Snapshot, kind: ElementKind, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidParams("removal size k must be at least 1".into()));
    }
    let cap = match kind {
        ElementKind::Node => g.n().saturating_sub(1),
        ElementKind::Edge => g.m(),
    };
    if cap == 0 {
        return Err(Error::Infeasible(format!(
            "no {kind} can be removed from a graph with N={} and E={}",
            g.n(),
            g.m()
        )));
    }
    Ok(k.min(cap))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins covering `[0, 1]`; values above the last edge land in the last bin.
    pub fn new(bin_width: f64) -> Self {
        let bins = ((1.0 / bin_width).ceil() as usize).max(1);
        Self {
            bin_width,
            counts: vec![0; bins],
        }
    }

    pub fn bin_of(&self, value: f64) -> usize {
        let i = (value.max(0.0) / self.bin_width).floor() as usize;
        i.min(self.counts.len() - 1)
    }

    pub fn add(&mut self, value: f64) {
        let b = self.bin_of(value);
        self.counts[b] += 1;
    }

    /// Most populated bin (lowest on ties).
    pub fn mode_bin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }

    pub fn center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.bin_width
    }
}

/// Aggregated Monte Carlo outcome of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DamageDistribution {
    pub year: Option<i32>,
    pub kind: ElementKind,
    pub k: usize,
    pub effective_k: usize,
    pub trials: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub disconnection_measure: DisconnectionMeasure,
    pub damage_max: f64,
    /// Center of the most populated histogram bin, clamped to `damage_max`.
    pub damage_mode: f64,
    pub damage_mean: f64,
    pub disconnection_max: f64,
    pub disconnection_mean: f64,
    pub histogram: Histogram,
}

impl DamageDistribution {
    pub const CSV_HEADER: &'static str = "year,kind,k,effective_k,trials,seed,damage_max,damage_mode,damage_mean,disconnection_max,disconnection_mean";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.year.map(|y| y.to_string()).unwrap_or_default(),
            self.kind,
            self.k,
            self.effective_k,
            self.trials,
            self.seed,
            self.damage_max,
            self.damage_mode,
            self.damage_mean,
            self.disconnection_max,
            self.disconnection_mean
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScenarioOptions {
    pub damage: DamageOptions,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Runs `trials` independent uniform removals of `k` elements.
///
/// Trial `t` draws its subset with a partial Fisher–Yates shuffle driven by
/// [`trial_stream`]`(seed, t)`, and statistics are folded in trial order, so the
/// result is bit-identical for any worker count.
pub fn run_scenario(
    g: &Snapshot,
    s: &RemovalScenario,
    opts: &ScenarioOptions,
) -> Result<DamageDistribution> {
    if s.trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    if !(s.bin_width > 0.0) || !s.bin_width.is_finite() {
        return Err(Error::InvalidParams(format!(
            "bin width must be positive, got {}",
            s.bin_width
        )));
    }
    let k = effective_k(g, s.kind, s.k)?;
    if k < s.k {
        log::info!(
            "{} removal capped from k={} to k={k} ({} {}s available)",
            s.kind,
            s.k,
            s.kind.count(g),
            s.kind
        );
    }
    let eval = DamageEvaluator::new(g, opts.damage)?;
    let count = s.kind.count(g);

    let sample = || -> Vec<DamageOutcome> {
        (0..s.trials)
            .into_par_iter()
            .map_init(
                || (eval.scratch(), Vec::with_capacity(count)),
                |(scratch, pool), t| {
                    let mut rng = trial_stream(s.seed, t as u64);
                    pool.clear();
                    pool.extend(0..count);
                    for i in 0..k {
                        let j = rng.gen_range(i..count);
                        pool.swap(i, j);
                    }
                    eval.evaluate(s.kind, &pool[..k], scratch)
                },
            )
            .collect()
    };
    let outcomes = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParams(format!("cannot start {w} workers: {e}")))?
            .install(sample),
        None => sample(),
    };

    let mut histogram = Histogram::new(s.bin_width);
    let (mut damage_max, mut damage_sum) = (f64::NEG_INFINITY, 0.0);
    let (mut disc_max, mut disc_sum) = (f64::NEG_INFINITY, 0.0);
    for o in &outcomes {
        histogram.add(o.damage);
        damage_max = damage_max.max(o.damage);
        damage_sum += o.damage;
        disc_max = disc_max.max(o.disconnection);
        disc_sum += o.disconnection;
    }
    let trials = outcomes.len() as f64;
    let damage_mode = histogram.center(histogram.mode_bin()).min(damage_max);
    Ok(DamageDistribution {
        year: g.year(),
        kind: s.kind,
        k: s.k,
        effective_k: k,
        trials: s.trials,
        seed: s.seed,
        normalization: opts.damage.normalization,
        disconnection_measure: opts.damage.disconnection,
        damage_max,
        damage_mode,
        damage_mean: damage_sum / trials,
        disconnection_max: disc_max,
        disconnection_mean: disc_sum / trials,
        histogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exhaustive,
    Greedy,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Greedy => "greedy",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "greedy" => Ok(Strategy::Greedy),
            other => Err(Error::InvalidParams(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Most damaging removal set found by a search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstReport {
    pub kind: ElementKind,
    pub strategy: Strategy,
    /// Element indices in ascending order.
    pub elements: Vec<usize>,
    pub damage: f64,
    pub disconnection: f64,
}

/// Exhaustive scan over single elements; ties go to the smallest index.
pub fn worst_element(g: &Snapshot, kind: ElementKind, opts: DamageOptions) -> Result<WorstReport> {
    let eval = DamageEvaluator::new(g, opts)?;
    let count = kind.count(g);
    let outcomes: Vec<DamageOutcome> = (0..count)
        .into_par_iter()
        .map_init(
            || eval.scratch(),
            |scratch, i| eval.evaluate(kind, &[i], scratch),
        )
        .collect();
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.damage > outcomes[best].damage {
            best = i;
        }
    }
    Ok(WorstReport {
        kind,
        strategy: Strategy::Exhaustive,
        elements: vec![best],
        damage: outcomes[best].damage,
        disconnection: outcomes[best].disconnection,
    })
}

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc · (n − i) / (i + 1) is exact at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Most damaging `k`-element set.
///
/// `Exhaustive` enumerates all `C(count, k)` subsets (lexicographically first
/// maximizer wins) and refuses to start beyond `budget`. `Greedy` grows the set
/// one element at a time by largest marginal damage.
pub fn worst_subset(
    g: &Snapshot,
    kind: ElementKind,
    k: usize,
    strategy: Strategy,
    budget: u128,
    opts: DamageOptions,
) -> Result<WorstReport> {
    let count = kind.count(g);
    let cap = match kind {
        ElementKind::Node => count.saturating_sub(1),
        ElementKind::Edge => count,
    };
    if k == 0 || k > cap {
        return Err(Error::Infeasible(format!(
            "cannot choose {k} {kind}s: between 1 and {cap} are available"
        )));
    }
    let eval = DamageEvaluator::new(g, opts)?;
    let (elements, outcome) = match strategy {
        Strategy::Exhaustive => {
            let combinations = binomial(count, k);
            if combinations > budget {
                return Err(Error::BudgetExceeded {
                    combinations,
                    budget,
                });
            }
            exhaustive(&eval, kind, count, k)
        }
        Strategy::Greedy => greedy(&eval, kind, count, k),
    };
    Ok(WorstReport {
        kind,
        strategy,
        elements,
        damage: outcome.damage,
        disconnection: outcome.disconnection,
    })
}

fn exhaustive(
    eval: &DamageEvaluator<'_>,
    kind: ElementKind,
    count: usize,
    k: usize,
) -> (Vec<usize>, DamageOutcome) {
    // Split on the first element; each branch enumerates its tail in lexicographic order.
    let branches: Vec<(Vec<usize>, DamageOutcome)> = (0..=count - k)
        .into_par_iter()
        .map(|first| {
            let mut scratch = eval.scratch();
            let mut combo: Vec<usize> = (first..first + k).collect();
            let mut best = (combo.clone(), eval.evaluate(kind, &combo, &mut scratch));
            while advance_tail(&mut combo, count) {
                let o = eval.evaluate(kind, &combo, &mut scratch);
                if o.damage > best.1.damage {
                    best = (combo.clone(), o);
                }
            }
            best
        })
        .collect();
    let mut best = 0;
    for (i, b) in branches.iter().enumerate() {
        if b.1.damage > branches[best].1.damage {
            best = i;
        }
    }
    branches.into_iter().nth(best).expect("at least one branch")
}

/// Next combination with the same first element; false when exhausted.
fn advance_tail(combo: &mut [usize], count: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 1 {
        i -= 1;
        if combo[i] < count - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn greedy(
    eval: &DamageEvaluator<'_>,
    kind: ElementKind,
    count: usize,
    k: usize,
) -> (Vec<usize>, DamageOutcome) {
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; count];
    let mut last = None;
    for _ in 0..k {
        let candidates: Vec<Option<DamageOutcome>> = (0..count)
            .into_par_iter()
            .map_init(
                || (eval.scratch(), Vec::with_capacity(k)),
                |(scratch, set), c| {
                    if taken[c] {
                        return None;
                    }
                    set.clear();
                    set.extend_from_slice(&chosen);
                    set.push(c);
                    Some(eval.evaluate(kind, set, scratch))
                },
            )
            .collect();
        let mut best: Option<(usize, DamageOutcome)> = None;
        for (c, o) in candidates.into_iter().enumerate() {
            if let Some(o) = o {
                if best.map_or(true, |(_, b)| o.damage > b.damage) {
                    best = Some((c, o));
                }
            }
        }
        let (c, o) = best.expect("k is below the element count");
        taken[c] = true;
        chosen.push(c);
        last = Some(o);
    }
    chosen.sort_unstable();
    (chosen, last.expect("k >= 1"))
}
