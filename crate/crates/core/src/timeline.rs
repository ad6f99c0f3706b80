//! Longitudinal analysis: per-year metrics and damage, and how they co-vary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::attack::{
    run_scenario, worst_element, DamageDistribution, DamageOptions, ElementKind, RemovalScenario,
    ScenarioOptions, WorstReport, DEFAULT_BIN_WIDTH,
};
use crate::data::{snapshot, TemporalDataset};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, MetricsOptions, MetricsReport};
use crate::rng::derive_seed;

/// A removal scenario repeated in every year of a timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScenarioSpec {
    pub kind: ElementKind,
    pub k: usize,
    pub trials: usize,
}

impl ScenarioSpec {
    /// Node and edge removal of each of `sizes`.
    pub fn grid(sizes: &[usize], trials: usize) -> Vec<ScenarioSpec> {
        [ElementKind::Node, ElementKind::Edge]
            .into_iter()
            .flat_map(|kind| sizes.iter().map(move |&k| ScenarioSpec { kind, k, trials }))
            .collect()
    }
}

/// Seed of the scenario `(kind, k)` in `year`, derived from the master seed.
pub fn scenario_seed(master: u64, year: i32, kind: ElementKind, k: usize) -> u64 {
    let kind = match kind {
        ElementKind::Node => 0,
        ElementKind::Edge => 1,
    };
    derive_seed(master, &[year as i64 as u64, kind, k as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimelineConfig {
    pub seed: u64,
    pub bin_width: f64,
    pub damage: DamageOptions,
    pub metrics: MetricsOptions,
    /// Also run the exhaustive single-element worst-case search each year.
    pub include_worst: bool,
    pub workers: Option<usize>,
}

impl Default for TimelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            bin_width: DEFAULT_BIN_WIDTH,
            damage: DamageOptions::default(),
            metrics: MetricsOptions::default(),
            include_worst: false,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearEntry {
    pub year: i32,
    pub metrics: MetricsReport,
    pub scenarios: Vec<DamageDistribution>,
    /// Single-element worst cases, node then edge, when requested.
    pub worst: Vec<WorstReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineSeries {
    pub entries: Vec<YearEntry>,
    /// Requested years whose snapshot was empty.
    pub skipped: Vec<i32>,
}

impl TimelineSeries {
    pub fn years(&self) -> Vec<i32> {
        self.entries.iter().map(|e| e.year).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One row per year: metric columns followed by per-scenario damage columns
    /// such as `dmg_max_node_k1` or `dmg_mode_edge_k20`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(MetricsReport::CSV_HEADER);
        let specs: Vec<(ElementKind, usize)> = self
            .entries
            .first()
            .map(|e| e.scenarios.iter().map(|s| (s.kind, s.k)).collect())
            .unwrap_or_default();
        for (kind, k) in &specs {
            for stat in ["dmg_max", "dmg_mode", "dmg_mean", "disc_max", "disc_mean"] {
                out.push_str(&format!(",{stat}_{kind}_k{k}"));
            }
        }
        out.push('\n');
        for e in &self.entries {
            out.push_str(&e.metrics.csv_row());
            for s in &e.scenarios {
                out.push_str(&format!(
                    ",{:.6},{:.6},{:.6},{:.6},{:.6}",
                    s.damage_max, s.damage_mode, s.damage_mean, s.disconnection_max, s.disconnection_mean
                ));
            }
            out.push('\n');
        }
        out
    }
}

/// Computes metrics and removal scenarios for each requested year, in year order.
pub fn build_timeline(
    ds: &TemporalDataset,
    years: &[i32],
    scenarios: &[ScenarioSpec],
    cfg: &TimelineConfig,
) -> Result<TimelineSeries> {
    let mut years = years.to_vec();
    years.sort_unstable();
    years.dedup();
    let mut series = TimelineSeries {
        entries: Vec::with_capacity(years.len()),
        skipped: Vec::new(),
    };
    for year in years {
        let g = match snapshot(ds, year) {
            Ok(g) => g,
            Err(Error::EmptySnapshot { .. }) => {
                log::warn!("{year}: no element in service, year skipped");
                series.skipped.push(year);
                continue;
            }
            Err(e) => return Err(e.in_year(year)),
        };
        let entry = year_entry(&g, year, scenarios, cfg).map_err(|e| e.in_year(year))?;
        series.entries.push(entry);
    }
    Ok(series)
}

fn year_entry(
    g: &crate::Snapshot,
    year: i32,
    scenarios: &[ScenarioSpec],
    cfg: &TimelineConfig,
) -> Result<YearEntry> {
    let metrics = compute_metrics(g, &cfg.metrics)?;
    let opts = ScenarioOptions {
        damage: cfg.damage,
        workers: cfg.workers,
    };
    let mut results = Vec::with_capacity(scenarios.len());
    for spec in scenarios {
        let scenario = RemovalScenario {
            kind: spec.kind,
            k: spec.k,
            trials: spec.trials,
            seed: scenario_seed(cfg.seed, year, spec.kind, spec.k),
            bin_width: cfg.bin_width,
        };
        results.push(run_scenario(g, &scenario, &opts)?);
    }
    let worst = if cfg.include_worst {
        vec![
            worst_element(g, ElementKind::Node, cfg.damage)?,
            worst_element(g, ElementKind::Edge, cfg.damage)?,
        ]
    } else {
        Vec::new()
    };
    Ok(YearEntry {
        year,
        metrics,
        scenarios: results,
        worst,
    })
}

/// Min-max scaling onto `[0, 1]`.
pub fn normalize(series: &[f64]) -> Result<Vec<f64>> {
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if series.is_empty() || !(max > min) {
        return Err(Error::NormalizationUndefined(format!(
            "series of {} values is constant or empty",
            series.len()
        )));
    }
    Ok(series.iter().map(|x| (x - min) / (max - min)).collect())
}

/// Pearson product-moment correlation.
pub fn correlate(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::CorrelationUndefined(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::CorrelationUndefined(format!(
            "needs at least 3 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::CorrelationUndefined("a series is constant".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum MetricName {
    #[serde(rename = "L")]
    AvgPathLength,
    #[serde(rename = "C")]
    Clustering,
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "eff")]
    Efficiency,
    #[serde(rename = "Q")]
    Modularity,
    #[serde(rename = "avg_degree")]
    AvgDegree,
}

impl MetricName {
    pub const DEFAULT_SET: [MetricName; 3] = [
        MetricName::AvgPathLength,
        MetricName::Clustering,
        MetricName::Sigma,
    ];

    /// `None` when the metric is undefined for that snapshot.
    pub fn value(self, r: &MetricsReport) -> Option<f64> {
        match self {
            MetricName::AvgPathLength => r.avg_path_length,
            MetricName::Clustering => Some(r.clustering),
            MetricName::Sigma => r.sigma,
            MetricName::Efficiency => r.eff,
            MetricName::Modularity => r.modularity,
            MetricName::AvgDegree => Some(r.avg_degree),
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricName::AvgPathLength => "L",
            MetricName::Clustering => "C",
            MetricName::Sigma => "sigma",
            MetricName::Efficiency => "eff",
            MetricName::Modularity => "Q",
            MetricName::AvgDegree => "avg_degree",
        })
    }
}

impl FromStr for MetricName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(MetricName::AvgPathLength),
            "C" => Ok(MetricName::Clustering),
            "sigma" => Ok(MetricName::Sigma),
            "eff" => Ok(MetricName::Efficiency),
            "Q" => Ok(MetricName::Modularity),
            "avg_degree" => Ok(MetricName::AvgDegree),
            other => Err(Error::InvalidParams(format!("unknown metric `{other}`"))),
        }
    }
}

/// Order of per-size normalization and averaging of the yearly damage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    NormalizeThenAverage,
    AverageThenNormalize,
}

/// Which yearly "maximal damage" enters the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DamageSource {
    /// Largest damage observed across Monte Carlo trials, per removal size.
    #[default]
    MonteCarloMax,
    /// Exhaustive single-element worst case.
    ExhaustiveSingle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportOptions {
    pub aggregation: Aggregation,
    pub source: DamageSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEntry {
    pub kind: ElementKind,
    pub metric: MetricName,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub normalization: &'static str,
    pub aggregation: Aggregation,
    pub damage_source: DamageSource,
    pub years: Vec<i32>,
    /// Normalized yearly damage per removal kind.
    pub damage: BTreeMap<ElementKind, Vec<f64>>,
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationReport {
    pub fn r(&self, kind: ElementKind, metric: MetricName) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.kind == kind && e.metric == metric)
            .map(|e| e.r)
    }
}

/// Normalized yearly damage of one removal kind, aggregated over removal sizes.
pub fn damage_series(t: &TimelineSeries, kind: ElementKind, opts: ReportOptions) -> Result<Vec<f64>> {
    let per_size: Vec<Vec<f64>> = match opts.source {
        DamageSource::ExhaustiveSingle => {
            let series = t
                .entries
                .iter()
                .map(|e| {
                    e.worst
                        .iter()
                        .find(|w| w.kind == kind)
                        .map(|w| w.damage)
                        .ok_or_else(|| {
                            Error::InvalidParams(format!(
                                "{}: timeline was built without worst-case search",
                                e.year
                            ))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            vec![series]
        }
        DamageSource::MonteCarloMax => {
            let mut by_k: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for e in &t.entries {
                for s in e.scenarios.iter().filter(|s| s.kind == kind) {
                    by_k.entry(s.k).or_default().push(s.damage_max);
                }
            }
            by_k.retain(|k, v| {
                let complete = v.len() == t.entries.len();
                if !complete {
                    log::warn!("{kind} k={k} is missing in some years and is left out");
                }
                complete
            });
            by_k.into_values().collect()
        }
    };
    if per_size.is_empty() {
        return Err(Error::InvalidParams(format!(
            "timeline has no {kind} removal results"
        )));
    }
    let years = t.entries.len();
    let mean_of = |cols: &[Vec<f64>]| -> Vec<f64> {
        (0..years)
            .map(|i| cols.iter().map(|c| c[i]).sum::<f64>() / cols.len() as f64)
            .collect()
    };
    match opts.aggregation {
        Aggregation::NormalizeThenAverage => {
            let normalized: Vec<Vec<f64>> = per_size
                .iter()
                .filter_map(|s| match normalize(s) {
                    Ok(v) => Some(v),
                    Err(_) => {
                        log::warn!("{kind} damage is constant across years for one removal size; left out");
                        None
                    }
                })
                .collect();
            if normalized.is_empty() {
                return Err(Error::NormalizationUndefined(format!(
                    "{kind} damage is constant across years for every removal size"
                )));
            }
            Ok(mean_of(&normalized))
        }
        Aggregation::AverageThenNormalize => normalize(&mean_of(&per_size)),
    }
}

/// Pearson correlation of normalized yearly damage with normalized metric series.
pub fn damage_metric_report(
    t: &TimelineSeries,
    metrics: &[MetricName],
    opts: ReportOptions,
) -> Result<CorrelationReport> {
    if t.len() < 3 {
        return Err(Error::CorrelationUndefined(format!(
            "needs at least 3 years, timeline has {}",
            t.len()
        )));
    }
    let mut kinds: Vec<ElementKind> = t
        .entries
        .iter()
        .flat_map(|e| e.scenarios.iter().map(|s| s.kind))
        .collect();
    if opts.source == DamageSource::ExhaustiveSingle {
        kinds = vec![ElementKind::Node, ElementKind::Edge];
    }
    kinds.sort();
    kinds.dedup();

    let mut damage = BTreeMap::new();
    let mut entries = Vec::new();
    for kind in kinds {
        let dmg = damage_series(t, kind, opts)?;
        for &metric in metrics {
            let raw = t
                .entries
                .iter()
                .map(|e| {
                    metric.value(&e.metrics).ok_or_else(|| {
                        Error::CorrelationUndefined(format!("{metric} is undefined in {}", e.year))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let r = correlate(&dmg, &normalize(&raw)?)?;
            entries.push(CorrelationEntry { kind, metric, r });
        }
        damage.insert(kind, dmg);
    }
    Ok(CorrelationReport {
        normalization: "min-max",
        aggregation: opts.aggregation,
        damage_source: opts.source,
        years: t.years(),
        damage,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[2.0, 4.0, 6.0]).unwrap(), [0.0, 0.5, 1.0]);
        assert!(matches!(
            normalize(&[5.0, 5.0, 5.0]),
            Err(Error::NormalizationUndefined(_))
        ));
        let x = [3.0, -1.0, 7.5, 2.0];
        let shifted: Vec<f64> = x.iter().map(|v| 4.0 * v - 11.0).collect();
        let (a, b) = (normalize(&x).unwrap(), normalize(&shifted).unwrap());
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn correlate_examples() {
        assert!((correlate(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((correlate(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        let r = correlate(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert!(correlate(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(correlate(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(correlate(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn scenario_seeds_differ_per_cell() {
        let a = scenario_seed(42, 2019, ElementKind::Node, 1);
        assert_ne!(a, scenario_seed(42, 2019, ElementKind::Edge, 1));
        assert_ne!(a, scenario_seed(42, 2009, ElementKind::Node, 1));
        assert_ne!(a, scenario_seed(42, 2019, ElementKind::Node, 2));
    }

    #[test]
    fn grid_has_twelve_standard_scenarios() {
        let specs = ScenarioSpec::grid(&crate::attack::STANDARD_SIZES, 10);
        assert_eq!(specs.len(), 12);
        assert_eq!(specs[0], ScenarioSpec { kind: ElementKind::Node, k: 1, trials: 10 });
        assert_eq!(specs[11].kind, ElementKind::Edge);
    }
}
