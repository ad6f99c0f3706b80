use gridvuln::attack::{damage, worst_subset, ElementKind, Strategy as Search, DEFAULT_BUDGET};
use gridvuln::data::{parse_dataset, snapshot, write_dataset, EdgeRecord, NodeRecord, TemporalDataset};
use gridvuln::degree::{cumulative_distribution, fit, CumulativeDegreeDistribution, DegreeModel, FitResult};
use gridvuln::metrics::efficiency;
use gridvuln::paths::connected_components;
use gridvuln::timeline::{correlate, normalize};
use gridvuln::Snapshot;
use proptest::prelude::*;

/// Graph on `2..=max_n` nodes from an arbitrary upper-triangle bitmask.
fn graph(max_n: usize) -> impl Strategy<Value = Snapshot> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut b = bits.iter();
            for i in 0..n {
                for j in i + 1..n {
                    if *b.next().unwrap() {
                        edges.push((i, j));
                    }
                }
            }
            Snapshot::from_edges(n, edges).unwrap()
        })
    })
}

fn with_edges(max_n: usize) -> impl Strategy<Value = Snapshot> {
    graph(max_n).prop_filter("needs an edge", |g| g.m() > 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn handshake_and_symmetry(g in graph(12)) {
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.m());
        for u in 0..g.n() {
            for &v in g.neighbors(u) {
                prop_assert!(g.neighbors(v as usize).contains(&(u as u32)));
            }
        }
    }

    #[test]
    fn components_partition_the_nodes(g in graph(12)) {
        let c = connected_components(&g);
        prop_assert_eq!(c.sizes.iter().sum::<usize>(), g.n());
        prop_assert_eq!(c.edge_counts.iter().sum::<usize>(), g.m());
        for &(u, v) in g.edges() {
            prop_assert_eq!(c.labels[u as usize], c.labels[v as usize]);
        }
    }

    #[test]
    fn survival_function_is_non_increasing(g in with_edges(14)) {
        let d = cumulative_distribution(&g).unwrap();
        prop_assert_eq!(d.survival()[0], 1.0);
        for w in d.survival().windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        for w in d.support().windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn fits_satisfy_normal_equations(g in with_edges(14)) {
        let d = cumulative_distribution(&g).unwrap();
        prop_assume!(d.len() >= 2);
        for model in [DegreeModel::Exponential, DegreeModel::PowerLaw] {
            let f = fit(&d, model).unwrap();
            let (a, b) = (f.amplitude.ln(), -f.rate_or_exponent);
            let (mut r_sum, mut rx_sum) = (0.0, 0.0);
            for (&k, &p) in d.support().iter().zip(d.survival()) {
                let x = FitResult::regressor(model, k);
                let r = p.ln() - a - b * x;
                r_sum += r;
                rx_sum += r * x;
            }
            prop_assert!(r_sum.abs() < 1e-9);
            prop_assert!(rx_sum.abs() < 1e-9);
            prop_assert!(f.r_squared <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn node_removal_damage_grows_with_the_set(g in with_edges(8), picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..6)) {
        let n = g.n();
        let mut order: Vec<usize> = Vec::new();
        for p in picks {
            let i = p.index(n);
            if !order.contains(&i) && order.len() + 1 < n {
                order.push(i);
            }
        }
        let mut last = 0.0;
        for len in 1..=order.len() {
            let d = damage(&g, ElementKind::Node, &order[..len]).unwrap().damage;
            prop_assert!(d >= last - 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
            last = d;
        }
    }

    #[test]
    fn edge_removal_damage_grows_with_the_set(g in with_edges(8), picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..6)) {
        let mut order: Vec<usize> = Vec::new();
        for p in picks {
            let i = p.index(g.m());
            if !order.contains(&i) {
                order.push(i);
            }
        }
        let mut last = 0.0;
        for len in 1..=order.len() {
            let d = damage(&g, ElementKind::Edge, &order[..len]).unwrap();
            prop_assert!(d.damage >= last - 1e-12);
            prop_assert!((0.0..=1.0).contains(&d.disconnection));
            last = d.damage;
        }
    }

    #[test]
    fn damage_equals_efficiency_drop_for_edges(g in with_edges(9), pick in any::<prop::sample::Index>()) {
        let e = pick.index(g.m());
        let base = efficiency(&g).unwrap();
        let rest = g.edges().iter().enumerate().filter(|(i, _)| *i != e).map(|(_, &(u, v))| (u as usize, v as usize));
        let after = efficiency(&Snapshot::from_edges(g.n(), rest).unwrap()).unwrap();
        let d = damage(&g, ElementKind::Edge, &[e]).unwrap().damage;
        prop_assert!((d - (base - after) / base).abs() < 1e-12);
    }

    #[test]
    fn worst_subset_grows_with_k(g in with_edges(7)) {
        let mut last = 0.0;
        for k in 1..g.n() {
            let w = worst_subset(&g, ElementKind::Node, k, Search::Exhaustive, DEFAULT_BUDGET, Default::default()).unwrap();
            prop_assert!(w.damage >= last - 1e-12);
            last = w.damage;
        }
    }

    #[test]
    fn correlation_is_symmetric_and_affine_invariant(
        xs in proptest::collection::vec(-100.0f64..100.0, 3..20),
        ys_seed in proptest::collection::vec(-100.0f64..100.0, 20),
        a in 0.1f64..10.0,
        b in -50.0f64..50.0,
    ) {
        let ys = &ys_seed[..xs.len()];
        let (Ok(r), Ok(r_rev)) = (correlate(&xs, ys), correlate(ys, &xs)) else {
            return Ok(());
        };
        prop_assert!((r - r_rev).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&r));
        let scaled: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        prop_assert!((correlate(&scaled, ys).unwrap() - r).abs() < 1e-9);
        let flipped: Vec<f64> = xs.iter().map(|x| -a * x + b).collect();
        prop_assert!((correlate(&flipped, ys).unwrap() + r).abs() < 1e-9);
        if let (Ok(nx), Ok(ny)) = (normalize(&xs), normalize(ys)) {
            prop_assert!((correlate(&nx, &ny).unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn normalized_series_span_the_unit_interval(xs in proptest::collection::vec(-1e6f64..1e6, 2..30)) {
        if let Ok(v) = normalize(&xs) {
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(min, 0.0);
            prop_assert_eq!(max, 1.0);
        }
    }
}

#[derive(Debug, Clone)]
struct History {
    nodes: Vec<(i32, Option<i32>)>,
    edges: Vec<(usize, usize, i32, Option<i32>)>,
}

fn history() -> impl Strategy<Value = History> {
    let node = (1950i32..2000, proptest::option::of(1..30i32))
        .prop_map(|(c, life)| (c, life.map(|l| c + l)));
    proptest::collection::vec(node, 2..10).prop_flat_map(|nodes| {
        let n = nodes.len();
        let edge = (0..n, 0..n, 0..25i32, proptest::option::of(1..20i32));
        proptest::collection::vec(edge, 0..20).prop_map(move |raw| {
            let edges = raw
                .into_iter()
                .filter(|(u, v, ..)| u != v)
                .map(|(u, v, delay, life)| {
                    let c = nodes[u].0.max(nodes[v].0) + delay;
                    (u, v, c, life.map(|l| c + l))
                })
                .collect();
            History { nodes: nodes.clone(), edges }
        })
    })
}

fn dataset(h: &History) -> TemporalDataset {
    let nodes = h
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &(c, d))| NodeRecord::new(format!("n{i:02}"), c, d))
        .collect();
    let edges = h
        .edges
        .iter()
        .enumerate()
        .map(|(i, &(u, v, c, d))| EdgeRecord::new(format!("e{i:02}"), format!("n{u:02}"), format!("n{v:02}"), c, d))
        .collect();
    TemporalDataset::new(nodes, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dataset_round_trips_through_csv(h in history()) {
        let ds = dataset(&h);
        let (mut nodes, mut edges) = (Vec::new(), Vec::new());
        write_dataset(&ds, &mut nodes, &mut edges).unwrap();
        let back = parse_dataset(nodes.as_slice(), edges.as_slice()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn snapshots_only_hold_active_elements(h in history(), year in 1945i32..2060) {
        let ds = dataset(&h);
        match snapshot(&ds, year) {
            Ok(g) => {
                let active: Vec<&NodeRecord> = ds.nodes().iter().filter(|n| n.lifetime.active_in(year)).collect();
                prop_assert_eq!(g.n(), active.len());
                for (i, rec) in active.iter().enumerate() {
                    prop_assert_eq!(g.id(i), rec.id.as_str());
                }
                for &(u, v) in g.edges() {
                    prop_assert!(u != v);
                    prop_assert!((v as usize) < g.n());
                }
                prop_assert!(g.m() <= ds.edges().iter().filter(|e| e.lifetime.active_in(year)).count());
            }
            Err(e) => {
                prop_assert!(ds.nodes().iter().all(|n| !n.lifetime.active_in(year)), "{}", e);
            }
        }
    }

    #[test]
    fn quiet_years_repeat_the_previous_snapshot(h in history(), year in 1951i32..2050) {
        let ds = dataset(&h);
        prop_assume!(!ds.event_years().contains(&year));
        let (a, b) = (snapshot(&ds, year - 1), snapshot(&ds, year));
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.export().nodes, b.export().nodes),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "emptiness changed in a year without events"),
        }
    }
}

#[test]
fn survival_points_are_validated() {
    assert!(CumulativeDegreeDistribution::from_points(vec![1.0, 2.0], vec![1.0, 0.5]).is_ok());
    assert!(CumulativeDegreeDistribution::from_points(vec![2.0, 1.0], vec![1.0, 0.5]).is_err());
    assert!(CumulativeDegreeDistribution::from_points(vec![1.0, 2.0], vec![0.5, 1.0]).is_err());
}

#[test]
fn exact_curves_fit_without_residual() {
    let support: Vec<f64> = (1..=12).map(f64::from).collect();
    let exp: Vec<f64> = support.iter().map(|k| (-0.4 * (k - 1.0)).exp()).collect();
    let pl: Vec<f64> = support.iter().map(|k| k.powf(-2.3)).collect();
    let e = fit(&CumulativeDegreeDistribution::from_points(support.clone(), exp).unwrap(), DegreeModel::Exponential).unwrap();
    assert!(e.sse < 1e-9 && (e.rate_or_exponent - 0.4).abs() < 1e-9);
    let p = fit(&CumulativeDegreeDistribution::from_points(support, pl).unwrap(), DegreeModel::PowerLaw).unwrap();
    assert!(p.sse < 1e-9 && (p.rate_or_exponent - 2.3).abs() < 1e-9);
}
