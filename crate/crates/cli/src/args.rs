use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridvuln::attack::{self, ElementKind};
use gridvuln::metrics;
use gridvuln::timeline::{self, MetricName};

#[derive(Debug, Parser)]
#[command(name = "gridvuln", version, about = "Structural vulnerability analysis of evolving grid networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export the grid of one year as a node and edge list.
    Snapshot(SnapshotArgs),
    /// Network properties per year.
    Metrics(MetricsArgs),
    /// Fit exponential and power-law models to the cumulative degree distribution.
    Fit(FitArgs),
    /// Monte Carlo removal of random nodes or edges.
    Attack(AttackArgs),
    /// Most damaging removal set.
    Worst(WorstArgs),
    /// Metrics and removal scenarios over a range of years.
    Timeline(TimelineArgs),
    /// Correlate yearly maximal damage with network properties.
    Correlate(CorrelateArgs),
    /// Write a generated dataset to a directory.
    GenFixture(GenFixtureArgs),
}

/// A set of years: `2019`, `1949,1969,1989` or `start:end:step`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearSelection(pub Vec<i32>);

impl FromStr for YearSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| format!("`{t}` is not a year"))
        };
        let years = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let (start, end, step) = match parts.as_slice() {
                [a, b] => (parse(a)?, parse(b)?, 1),
                [a, b, c] => (parse(a)?, parse(b)?, parse(c)?),
                _ => return Err(format!("`{s}` is not of the form start:end:step")),
            };
            if step <= 0 {
                return Err(format!("step must be positive, got {step}"));
            }
            if end < start {
                return Err(format!("range {start}:{end} is empty"));
            }
            (start..=end).step_by(step as usize).collect()
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        let mut years = years;
        years.sort_unstable();
        years.dedup();
        Ok(YearSelection(years))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindSelection {
    Node,
    Edge,
    Both,
}

impl KindSelection {
    pub fn kinds(self) -> Vec<ElementKind> {
        match self {
            KindSelection::Node => vec![ElementKind::Node],
            KindSelection::Edge => vec![ElementKind::Edge],
            KindSelection::Both => vec![ElementKind::Node, ElementKind::Edge],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    FixedN,
    ShrunkN,
}

impl From<NormalizationArg> for attack::Normalization {
    fn from(v: NormalizationArg) -> Self {
        match v {
            NormalizationArg::FixedN => attack::Normalization::FixedN,
            NormalizationArg::ShrunkN => attack::Normalization::ShrunkN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DisconnectionArg {
    LargestComponent,
    IncidentEdges,
}

impl From<DisconnectionArg> for attack::DisconnectionMeasure {
    fn from(v: DisconnectionArg) -> Self {
        match v {
            DisconnectionArg::LargestComponent => attack::DisconnectionMeasure::LargestComponent,
            DisconnectionArg::IncidentEdges => attack::DisconnectionMeasure::IncidentEdges,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaBaselineArg {
    Analytic,
    Ensemble,
}

impl From<SigmaBaselineArg> for metrics::SigmaBaseline {
    fn from(v: SigmaBaselineArg) -> Self {
        match v {
            SigmaBaselineArg::Analytic => metrics::SigmaBaseline::Analytic,
            SigmaBaselineArg::Ensemble => metrics::SigmaBaseline::Ensemble,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModularityNormArg {
    Standard,
    AverageDegree,
}

impl From<ModularityNormArg> for metrics::ModularityNorm {
    fn from(v: ModularityNormArg) -> Self {
        match v {
            ModularityNormArg::Standard => metrics::ModularityNorm::Standard,
            ModularityNormArg::AverageDegree => metrics::ModularityNorm::AverageDegree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Exhaustive,
    Greedy,
}

impl From<StrategyArg> for attack::Strategy {
    fn from(v: StrategyArg) -> Self {
        match v {
            StrategyArg::Exhaustive => attack::Strategy::Exhaustive,
            StrategyArg::Greedy => attack::Strategy::Greedy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    NormalizeThenAverage,
    AverageThenNormalize,
}

impl From<AggregationArg> for timeline::Aggregation {
    fn from(v: AggregationArg) -> Self {
        match v {
            AggregationArg::NormalizeThenAverage => timeline::Aggregation::NormalizeThenAverage,
            AggregationArg::AverageThenNormalize => timeline::Aggregation::AverageThenNormalize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DamageSourceArg {
    MonteCarloMax,
    ExhaustiveSingle,
}

impl From<DamageSourceArg> for timeline::DamageSource {
    fn from(v: DamageSourceArg) -> Self {
        match v {
            DamageSourceArg::MonteCarloMax => timeline::DamageSource::MonteCarloMax,
            DamageSourceArg::ExhaustiveSingle => timeline::DamageSource::ExhaustiveSingle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    GrowingGrid,
    Star,
    Path,
    Ring,
    Complete,
    Er,
    Gnm,
    Pa,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Directory holding nodes.csv and edges.csv.
    #[arg(long)]
    pub data: PathBuf,
    /// Years to analyze: `2019`, `1949,1969` or `1949:2019:10`.
    #[arg(long, visible_alias = "year")]
    pub years: YearSelection,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write `<command>.<format>` into this directory instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MetricFlags {
    /// Seed for community detection tie-breaks and ensemble baselines.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SigmaBaselineArg::Analytic)]
    pub sigma_baseline: SigmaBaselineArg,
    #[arg(long, value_enum, default_value_t = ModularityNormArg::Standard)]
    pub modularity_norm: ModularityNormArg,
    /// Report metrics that are undefined for a year as blank instead of failing.
    #[arg(long)]
    pub allow_undefined: bool,
}

#[derive(Debug, Args)]
pub struct DamageFlags {
    #[arg(long, value_enum, default_value_t = NormalizationArg::FixedN)]
    pub normalization: NormalizationArg,
    #[arg(long, value_enum, default_value_t = DisconnectionArg::LargestComponent)]
    pub disconnection: DisconnectionArg,
}

#[derive(Debug, Args)]
pub struct ScenarioFlags {
    #[arg(long, value_enum, default_value_t = KindSelection::Both)]
    pub kind: KindSelection,
    /// Removal sizes, comma separated.
    #[arg(long = "k", value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = attack::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Master seed; every scenario derives its own seed from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = attack::DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
}

#[derive(Debug, Args)]
pub struct SnapshotArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub year: i32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON export, or a CSV edge list of node ids.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub metric: MetricFlags,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub damage: DamageFlags,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct WorstArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum, default_value_t = KindSelection::Both)]
    pub kind: KindSelection,
    /// Removal set sizes, comma separated.
    #[arg(long = "k", value_delimiter = ',', default_value = "1")]
    pub k: Vec<usize>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
    pub strategy: StrategyArg,
    /// Largest number of subsets an exhaustive search may evaluate.
    #[arg(long, default_value_t = attack::DEFAULT_BUDGET)]
    pub budget: u128,
    #[command(flatten)]
    pub damage: DamageFlags,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TimelineArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub damage: DamageFlags,
    #[arg(long, value_enum, default_value_t = SigmaBaselineArg::Analytic)]
    pub sigma_baseline: SigmaBaselineArg,
    #[arg(long, value_enum, default_value_t = ModularityNormArg::Standard)]
    pub modularity_norm: ModularityNormArg,
    #[arg(long)]
    pub allow_undefined: bool,
    /// Also search the single most damaging node and edge each year.
    #[arg(long)]
    pub include_worst: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub damage: DamageFlags,
    /// Metrics to correlate with damage.
    #[arg(long, value_delimiter = ',', default_value = "L,C,sigma")]
    pub metrics: Vec<MetricName>,
    #[arg(long, value_enum, default_value_t = AggregationArg::NormalizeThenAverage)]
    pub aggregation: AggregationArg,
    #[arg(long, value_enum, default_value_t = DamageSourceArg::MonteCarloMax)]
    pub damage_source: DamageSourceArg,
    #[arg(long, value_enum, default_value_t = SigmaBaselineArg::Analytic)]
    pub sigma_baseline: SigmaBaselineArg,
    #[arg(long, value_enum, default_value_t = ModularityNormArg::Standard)]
    pub modularity_norm: ModularityNormArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct GenFixtureArgs {
    /// Directory to write nodes.csv and edges.csv into.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelArg::GrowingGrid)]
    pub model: ModelArg,
    #[arg(long)]
    pub n: Option<usize>,
    /// Even degree (ring, default 2), edge count (gnm) or links per new node (pa).
    #[arg(long)]
    pub m: Option<usize>,
    /// Edge probability (er).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Commissioning year of every element of a static model.
    #[arg(long, default_value_t = 2019)]
    pub year: i32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_selections() {
        let y = |s: &str| s.parse::<YearSelection>().map(|v| v.0);
        assert_eq!(y("2019").unwrap(), [2019]);
        assert_eq!(y("1969,1949,1969").unwrap(), [1949, 1969]);
        assert_eq!(y("1949:2019:10").unwrap().len(), 8);
        assert_eq!(y("2000:2002").unwrap(), [2000, 2001, 2002]);
        assert!(y("2019:2000:1").is_err());
        assert!(y("1949:2019:0").is_err());
        assert!(y("19x9").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
