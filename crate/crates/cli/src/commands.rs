use std::path::Path;

use gridvuln::attack::{
    run_scenario, worst_subset, DamageOptions, DisconnectionMeasure, Normalization,
    RemovalScenario, ScenarioOptions, Strategy, STANDARD_SIZES,
};
use gridvuln::data::{load_dir, save_dir, snapshot, EdgeRecord, NodeRecord, TemporalDataset};
use gridvuln::degree::{classify, FitResult};
use gridvuln::fixture::{growing_grid, GrowthParams};
use gridvuln::generate::{generate, Model};
use gridvuln::metrics::{compute_metrics, MetricsOptions, MetricsReport, ModularityNorm, SigmaBaseline};
use gridvuln::timeline::{
    build_timeline, damage_metric_report, scenario_seed, DamageSource, ReportOptions, ScenarioSpec,
    TimelineConfig,
};
use gridvuln::{Error, Snapshot};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{emit, emit_to, render, Record, RunInfo};
use crate::Failure;

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Snapshot(a) => cmd_snapshot(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Worst(a) => cmd_worst(a),
        Command::Timeline(a) => cmd_timeline(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::GenFixture(a) => cmd_gen_fixture(a),
    }
}

fn year_snapshot(ds: &TemporalDataset, year: i32) -> Result<Snapshot, Failure> {
    Ok(snapshot(ds, year)?)
}

fn kebab(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn damage_options(d: &DamageFlags) -> DamageOptions {
    DamageOptions {
        normalization: Normalization::from(d.normalization),
        disconnection: DisconnectionMeasure::from(d.disconnection),
    }
}

fn with_damage(run: RunInfo, opts: DamageOptions) -> RunInfo {
    run.with("normalization", kebab(opts.normalization))
        .with("disconnection", kebab(opts.disconnection))
}

fn metric_options(seed: u64, sigma: SigmaBaselineArg, norm: ModularityNormArg) -> MetricsOptions {
    MetricsOptions {
        seed,
        sigma_baseline: SigmaBaseline::from(sigma),
        modularity_norm: ModularityNorm::from(norm),
    }
}

fn with_metric_options(run: RunInfo, o: &MetricsOptions) -> RunInfo {
    let sigma = match o.sigma_baseline {
        SigmaBaseline::Analytic => "analytic",
        SigmaBaseline::Ensemble => "ensemble",
    };
    let norm = match o.modularity_norm {
        ModularityNorm::Standard => "standard",
        ModularityNorm::AverageDegree => "average-degree",
    };
    run.with("sigma_baseline", sigma).with("modularity_norm", norm)
}

/// Fails with the year and metric named unless undefined values are allowed.
fn check_defined(r: &MetricsReport, allow: bool) -> Result<(), Failure> {
    if allow {
        return Ok(());
    }
    let fields = [
        ("Q", r.modularity),
        ("L", r.avg_path_length),
        ("sigma", r.sigma),
        ("eff", r.eff),
    ];
    match fields.iter().find(|(_, v)| v.is_none()) {
        Some((name, _)) => Err(Failure::Undefined(format!(
            "year {}: {name} is undefined for this snapshot (pass --allow-undefined to report it as blank)",
            r.year
        ))),
        None => Ok(()),
    }
}

fn sorted_sizes(k: &[usize]) -> Vec<usize> {
    let mut k = k.to_vec();
    k.sort_unstable();
    k.dedup();
    k
}

fn cmd_snapshot(a: SnapshotArgs) -> Result<(), Failure> {
    let ds = load_dir(&a.data)?;
    let g = year_snapshot(&ds, a.year)?;
    let export = g.export();
    let run = RunInfo::new("snapshot").with("year", a.year);
    let text = match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&export).map_err(Error::from)?;
            v["run"] = run.to_value();
            let mut s = serde_json::to_string_pretty(&v).map_err(Error::from)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let records: Vec<Record> = export
                .edges
                .iter()
                .map(|[u, v]| Record::new(format!("{u},{v}"), &[u, v]))
                .collect::<Result<_, _>>()?;
            render(&run, "from,to", &records, Format::Csv)?
        }
    };
    emit_to(a.out.as_deref(), "snapshot", a.format, &text)
}

fn cmd_metrics(a: MetricsArgs) -> Result<(), Failure> {
    let ds = load_dir(&a.input.data)?;
    let opts = metric_options(a.metric.seed, a.metric.sigma_baseline, a.metric.modularity_norm);
    let mut records = Vec::new();
    for &year in &a.input.years.0 {
        let g = year_snapshot(&ds, year)?;
        let report = compute_metrics(&g, &opts).map_err(|e| e.in_year(year))?;
        check_defined(&report, a.metric.allow_undefined)?;
        records.push(Record::new(report.csv_row(), &report)?);
    }
    let run = with_metric_options(RunInfo::new("metrics").with("seed", opts.seed), &opts);
    let text = render(&run, MetricsReport::CSV_HEADER, &records, a.output.format)?;
    emit(&a.output, "metrics", &text)
}

fn cmd_fit(a: FitArgs) -> Result<(), Failure> {
    let ds = load_dir(&a.input.data)?;
    let mut run = RunInfo::new("fit").with("fit", "least squares on ln P(K >= k)");
    let mut records = Vec::new();
    for &year in &a.input.years.0 {
        let g = year_snapshot(&ds, year)?;
        let c = classify(&g).map_err(|e| e.in_year(year))?;
        let fits: Vec<&FitResult> = c.exponential.iter().chain(c.power_law.iter()).collect();
        if fits.is_empty() {
            return Err(Error::FitImpossible("fewer than 2 distinct positive degrees".into())
                .in_year(year)
                .into());
        }
        run = run.with(format!("verdict {year}"), c.verdict.to_string());
        for f in fits {
            let row = format!(
                "{year},{},{:.6},{:.6},{:.6e},{:.6}",
                f.model, f.amplitude, f.rate_or_exponent, f.sse, f.r_squared
            );
            let mut v = serde_json::to_value(f).map_err(Error::from)?;
            v["year"] = year.into();
            v["verdict"] = c.verdict.to_string().into();
            records.push(Record { csv: row, json: v });
        }
    }
    let text = render(&run, "year,model,amplitude,rate_or_exponent,sse,r_squared", &records, a.output.format)?;
    emit(&a.output, "fit", &text)
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| {
        Failure::Config(format!(
            "{command} needs an explicit --seed so that its results can be reproduced"
        ))
    })
}

fn with_scenarios(run: RunInfo, s: &ScenarioFlags, seed: u64, sizes: &[usize]) -> RunInfo {
    let kinds: Vec<&str> = s.kind.kinds().iter().map(|k| k.as_str()).collect();
    run.with("seed", seed)
        .with("seed_derivation", "per (year, kind, k) from the master seed")
        .with("trials", s.trials)
        .with("kinds", kinds.join(","))
        .with("k", sizes.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
        .with("bin_width", s.bin_width)
}

fn cmd_attack(a: AttackArgs) -> Result<(), Failure> {
    let seed = require_seed(a.scenario.seed, "attack")?;
    let sizes = sorted_sizes(&a.scenario.k);
    if sizes.is_empty() {
        return Err(Failure::Config("attack needs at least one removal size in --k".into()));
    }
    let ds = load_dir(&a.input.data)?;
    let opts = ScenarioOptions {
        damage: damage_options(&a.damage),
        workers: a.scenario.workers,
    };
    let mut records = Vec::new();
    for &year in &a.input.years.0 {
        let g = year_snapshot(&ds, year)?;
        for kind in a.scenario.kind.kinds() {
            for &k in &sizes {
                let s = RemovalScenario {
                    kind,
                    k,
                    trials: a.scenario.trials,
                    seed: scenario_seed(seed, year, kind, k),
                    bin_width: a.scenario.bin_width,
                };
                let d = run_scenario(&g, &s, &opts).map_err(|e| e.in_year(year))?;
                if d.effective_k < k {
                    log::warn!(
                        "{year}: {kind} removal of k={k} capped to effective_k={}",
                        d.effective_k
                    );
                }
                records.push(Record::new(d.csv_row(), &d)?);
            }
        }
    }
    let run = with_damage(with_scenarios(RunInfo::new("attack"), &a.scenario, seed, &sizes), opts.damage);
    let header = gridvuln::attack::DamageDistribution::CSV_HEADER;
    let text = render(&run, header, &records, a.output.format)?;
    emit(&a.output, "attack", &text)
}

fn cmd_worst(a: WorstArgs) -> Result<(), Failure> {
    let sizes = sorted_sizes(&a.k);
    if sizes.is_empty() {
        return Err(Failure::Config("worst needs at least one set size in --k".into()));
    }
    let ds = load_dir(&a.input.data)?;
    let damage = damage_options(&a.damage);
    let strategy = Strategy::from(a.strategy);
    let mut records = Vec::new();
    for &year in &a.input.years.0 {
        let g = year_snapshot(&ds, year)?;
        for kind in a.kind.kinds() {
            for &k in &sizes {
                let w = worst_subset(&g, kind, k, strategy, a.budget, damage).map_err(|e| e.in_year(year))?;
                let ids: Vec<String> = w.elements.iter().map(|&i| kind.label(&g, i)).collect();
                let row = format!(
                    "{year},{kind},{k},{strategy},{},{:.6},{:.6}",
                    ids.join(";"),
                    w.damage,
                    w.disconnection
                );
                let v = json!({
                    "year": year,
                    "kind": kind,
                    "k": k,
                    "strategy": strategy,
                    "elements": ids,
                    "damage": w.damage,
                    "disconnection": w.disconnection,
                });
                records.push(Record { csv: row, json: v });
            }
        }
    }
    let mut run = RunInfo::new("worst").with("strategy", strategy.to_string());
    if strategy == Strategy::Exhaustive {
        run = run.with("budget", a.budget.to_string());
    }
    let run = with_damage(run, damage);
    let header = "year,kind,k,strategy,elements,damage,disconnection";
    let text = render(&run, header, &records, a.output.format)?;
    emit(&a.output, "worst", &text)
}

fn cmd_timeline(a: TimelineArgs) -> Result<(), Failure> {
    let sizes = sorted_sizes(&a.scenario.k);
    let specs: Vec<ScenarioSpec> = a
        .scenario
        .kind
        .kinds()
        .into_iter()
        .flat_map(|kind| sizes.iter().map(move |&k| ScenarioSpec { kind, k, trials: a.scenario.trials }))
        .collect();
    let seed = if specs.is_empty() && !a.include_worst {
        a.scenario.seed.unwrap_or(0)
    } else {
        require_seed(a.scenario.seed, "timeline with removal scenarios")?
    };
    let ds = load_dir(&a.input.data)?;
    let cfg = TimelineConfig {
        seed,
        bin_width: a.scenario.bin_width,
        damage: damage_options(&a.damage),
        metrics: metric_options(seed, a.sigma_baseline, a.modularity_norm),
        include_worst: a.include_worst,
        workers: a.scenario.workers,
    };
    let t = build_timeline(&ds, &a.input.years.0, &specs, &cfg)?;
    for e in &t.entries {
        check_defined(&e.metrics, a.allow_undefined)?;
    }
    let csv = t.to_csv();
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default().to_owned();
    let records: Vec<Record> = lines
        .zip(&t.entries)
        .map(|(row, e)| Record::new(row.to_owned(), e))
        .collect::<Result<_, _>>()?;
    let mut run = with_scenarios(RunInfo::new("timeline"), &a.scenario, seed, &sizes);
    run = with_metric_options(with_damage(run, cfg.damage), &cfg.metrics);
    if !t.skipped.is_empty() {
        let skipped: Vec<String> = t.skipped.iter().map(|y| y.to_string()).collect();
        run = run.with("skipped_empty_years", skipped.join(","));
    }
    let text = render(&run, &header, &records, a.output.format)?;
    emit(&a.output, "timeline", &text)
}

fn cmd_correlate(a: CorrelateArgs) -> Result<(), Failure> {
    let source = DamageSource::from(a.damage_source);
    let sizes = if a.scenario.k.is_empty() {
        STANDARD_SIZES.to_vec()
    } else {
        sorted_sizes(&a.scenario.k)
    };
    let kinds = a.scenario.kind.kinds();
    let specs: Vec<ScenarioSpec> = match source {
        DamageSource::ExhaustiveSingle => Vec::new(),
        DamageSource::MonteCarloMax => kinds
            .iter()
            .flat_map(|&kind| sizes.iter().map(move |&k| ScenarioSpec { kind, k, trials: a.scenario.trials }))
            .collect(),
    };
    let seed = match source {
        DamageSource::MonteCarloMax => require_seed(a.scenario.seed, "correlate")?,
        DamageSource::ExhaustiveSingle => a.scenario.seed.unwrap_or(0),
    };
    let ds = load_dir(&a.input.data)?;
    let cfg = TimelineConfig {
        seed,
        bin_width: a.scenario.bin_width,
        damage: damage_options(&a.damage),
        metrics: metric_options(seed, a.sigma_baseline, a.modularity_norm),
        include_worst: source == DamageSource::ExhaustiveSingle,
        workers: a.scenario.workers,
    };
    let t = build_timeline(&ds, &a.input.years.0, &specs, &cfg)?;
    let opts = ReportOptions {
        aggregation: a.aggregation.into(),
        source,
    };
    let report = damage_metric_report(&t, &a.metrics, opts)?;
    let mut records = Vec::new();
    for e in report.entries.iter().filter(|e| kinds.contains(&e.kind)) {
        let v = json!({
            "kind": e.kind,
            "metric": e.metric,
            "r": e.r,
            "years": report.years,
            "damage": report.damage.get(&e.kind),
        });
        records.push(Record {
            csv: format!("{},{},{:.6}", e.kind, e.metric, e.r),
            json: v,
        });
    }
    let years: Vec<String> = report.years.iter().map(|y| y.to_string()).collect();
    let mut run = RunInfo::new("correlate")
        .with("years", years.join(","))
        .with("normalization", report.normalization)
        .with("aggregation", kebab(report.aggregation))
        .with("damage_source", kebab(report.damage_source));
    if source == DamageSource::MonteCarloMax {
        run = with_scenarios(run, &a.scenario, seed, &sizes);
    } else {
        run = run.with("seed", seed);
    }
    let run = with_metric_options(
        run.with("removal_normalization", kebab(cfg.damage.normalization)),
        &cfg.metrics,
    );
    let text = render(&run, "kind,metric,r", &records, a.output.format)?;
    emit(&a.output, "correlate", &text)
}

fn cmd_gen_fixture(a: GenFixtureArgs) -> Result<(), Failure> {
    let need_n = || a.n.ok_or_else(|| Failure::Config(format!("model {} needs --n", model_label(a.model))));
    let need_m = || a.m.ok_or_else(|| Failure::Config(format!("model {} needs --m", model_label(a.model))));
    let model = match a.model {
        ModelArg::GrowingGrid => None,
        ModelArg::Star => Some(Model::Star { n: need_n()? }),
        ModelArg::Path => Some(Model::Path { n: need_n()? }),
        ModelArg::Ring => Some(Model::Ring { n: need_n()?, k: a.m.unwrap_or(2) }),
        ModelArg::Complete => Some(Model::Complete { n: need_n()? }),
        ModelArg::Er => Some(Model::ErdosRenyi {
            n: need_n()?,
            p: a.p.ok_or_else(|| Failure::Config("model er needs --p".into()))?,
        }),
        ModelArg::Gnm => Some(Model::ErdosRenyiM { n: need_n()?, m: need_m()? }),
        ModelArg::Pa => Some(Model::PreferentialAttachment { n: need_n()?, m: need_m()? }),
    };
    let ds = match model {
        None => {
            if a.n.is_some() || a.m.is_some() || a.p.is_some() {
                log::warn!("--n, --m and --p are ignored by the growing-grid model");
            }
            growing_grid(&GrowthParams::default(), a.seed)?
        }
        Some(m) => static_dataset(&generate(m, a.seed)?, a.year)?,
    };
    save_dir(&ds, &a.out)?;
    let model_name = model_label(a.model);
    let run = RunInfo::new("gen-fixture")
        .with("model", model_name)
        .with("seed", a.seed)
        .with("nodes", ds.nodes().len())
        .with("edges", ds.edges().len());
    let run = match model {
        Some(m) => run.with("parameters", format!("{m:?}")).with("year", a.year),
        None => run,
    };
    prepend_comments(&a.out, &run)
}

fn model_label(m: ModelArg) -> String {
    use clap::ValueEnum;
    m.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
}

/// Every element of `g` commissioned in `year`; ids sort in index order.
fn static_dataset(g: &Snapshot, year: i32) -> Result<TemporalDataset, Failure> {
    let width = (g.n().max(g.m()).max(1) - 1).to_string().len().max(4);
    let node_id = |i: usize| format!("N{i:0width$}");
    let nodes = (0..g.n()).map(|i| NodeRecord::new(node_id(i), year, None)).collect();
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            EdgeRecord::new(format!("E{e:0width$}"), node_id(u as usize), node_id(v as usize), year, None)
        })
        .collect();
    Ok(TemporalDataset::new(nodes, edges)?)
}

/// Adds the run configuration as `#` comments on top of both dataset files.
fn prepend_comments(dir: &Path, run: &RunInfo) -> Result<(), Failure> {
    for name in [gridvuln::data::NODES_FILE, gridvuln::data::EDGES_FILE] {
        let path = dir.join(name);
        let open = |source| Error::Open {
            path: path.display().to_string(),
            source,
        };
        let body = std::fs::read_to_string(&path).map_err(open)?;
        std::fs::write(&path, run.comment_lines() + &body).map_err(open)?;
    }
    Ok(())
}
