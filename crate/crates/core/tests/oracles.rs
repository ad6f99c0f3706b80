//! Brute-force oracles checked against the library on many small random graphs.

use gridvuln::community::{detect_communities, Partition};
use gridvuln::generate::{generate, Model};
use gridvuln::metrics::{avg_path_length, clustering, efficiency, modularity};
use gridvuln::paths::{all_pairs_distances, bfs_from, diameter, UNREACHABLE};
use gridvuln::Snapshot;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: u64 = u64::MAX / 4;

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Snapshot {
    let n = rng.gen_range(2..=max_n);
    let p: f64 = rng.gen_range(0.1..0.9);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Snapshot::from_edges(n, edges).unwrap()
}

fn adjacency(g: &Snapshot) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for &(u, v) in g.edges() {
        a[u as usize][v as usize] = true;
        a[v as usize][u as usize] = true;
    }
    a
}

/// Cubic relaxation over the adjacency matrix.
fn floyd_warshall(g: &Snapshot) -> Vec<Vec<u64>> {
    let n = g.n();
    let a = adjacency(g);
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn oracle_efficiency(d: &[Vec<u64>]) -> f64 {
    let n = d.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && d[i][j] < INF {
                s += 1.0 / d[i][j] as f64;
            }
        }
    }
    s / (n * (n - 1)) as f64
}

fn oracle_path_length(d: &[Vec<u64>]) -> Option<f64> {
    let n = d.len();
    let (mut s, mut c) = (0u64, 0u64);
    for i in 0..n {
        for j in 0..n {
            if i != j && d[i][j] < INF {
                s += d[i][j];
                c += 1;
            }
        }
    }
    (c > 0).then(|| s as f64 / c as f64)
}

/// Local coefficient evaluated from the adjacency matrix directly.
fn oracle_clustering(g: &Snapshot) -> f64 {
    let a = adjacency(g);
    let n = g.n();
    let mut total = 0.0;
    for i in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&j| a[i][j]).collect();
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let mut links = 0;
        for x in 0..k {
            for y in x + 1..k {
                if a[nb[x]][nb[y]] {
                    links += 1;
                }
            }
        }
        total += 2.0 * links as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}

/// Σ_ij (A_ij − k_i k_j / 2E) δ(g_i, g_j) / 2E over the full matrix.
fn oracle_modularity(g: &Snapshot, p: &Partition) -> f64 {
    let a = adjacency(g);
    let two_m = 2.0 * g.m() as f64;
    let k: Vec<f64> = (0..g.n()).map(|i| g.degree(i) as f64).collect();
    let mut q = 0.0;
    for i in 0..g.n() {
        for j in 0..g.n() {
            if p.label(i) == p.label(j) {
                q += f64::from(u8::from(a[i][j])) - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

#[test]
fn distances_and_metrics_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut disconnected = 0;
    for _ in 0..200 {
        let g = random_graph(&mut rng, 7);
        let d = floyd_warshall(&g);
        let table = all_pairs_distances(&g);
        for i in 0..g.n() {
            assert_eq!(bfs_from(&g, i).unwrap(), table.row(i));
            for j in 0..g.n() {
                let expect = if d[i][j] >= INF { UNREACHABLE } else { d[i][j] as u32 };
                assert_eq!(table.get(i, j), expect);
                assert_eq!(table.get(i, j), table.get(j, i));
            }
        }
        if d.iter().flatten().any(|&x| x >= INF) {
            disconnected += 1;
        }
        assert!((efficiency(&g).unwrap() - oracle_efficiency(&d)).abs() < 1e-12);
        match oracle_path_length(&d) {
            Some(l) => assert!((avg_path_length(&g).unwrap() - l).abs() < 1e-12),
            None => assert!(avg_path_length(&g).is_err()),
        }
        assert!((clustering(&g).unwrap() - oracle_clustering(&g)).abs() < 1e-12);
    }
    assert!(disconnected > 20, "only {disconnected} disconnected instances");
}

#[test]
fn modularity_matches_matrix_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 7);
        if g.m() == 0 {
            continue;
        }
        let c = rng.gen_range(1..=g.n());
        let p = Partition::from_labels((0..g.n()).map(|_| rng.gen_range(0..c)).collect());
        let q = modularity(&g, &p).unwrap();
        assert!((q - oracle_modularity(&g, &p)).abs() < 1e-12);
        assert!((-1.0..=1.0).contains(&q));
        assert_eq!(modularity(&g, &Partition::single(g.n())).unwrap(), 0.0);
    }
}

#[test]
fn efficiency_drops_under_every_single_edge_deletion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 12);
        let base = efficiency(&g).unwrap();
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (u as usize, v as usize)).collect();
        for skip in 0..edges.len() {
            let rest = edges.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &e)| e);
            let h = Snapshot::from_edges(g.n(), rest).unwrap();
            assert!(efficiency(&h).unwrap() <= base + 1e-15);
        }
    }
}

#[test]
fn efficiency_is_one_only_for_complete_graphs() {
    for n in 2..12 {
        assert_eq!(efficiency(&generate(Model::Complete { n }, 0).unwrap()).unwrap(), 1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 10);
        if g.m() < g.n() * (g.n() - 1) / 2 {
            assert!(efficiency(&g).unwrap() < 1.0);
        }
    }
}

#[test]
fn harmonic_mean_bound_on_connected_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    for _ in 0..300 {
        let g = random_graph(&mut rng, 10);
        let d = floyd_warshall(&g);
        if d.iter().flatten().any(|&x| x >= INF) {
            continue;
        }
        checked += 1;
        let (eff, l) = (efficiency(&g).unwrap(), avg_path_length(&g).unwrap());
        assert!(1.0 / l <= eff + 1e-12);
    }
    assert!(checked > 50);
}

#[test]
fn diameter_bounds_and_tree_double_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 10);
        assert!(diameter(&g).unwrap() as usize <= g.n() - 1);
    }
    for seed in 0..50 {
        let tree = generate(Model::PreferentialAttachment { n: 40, m: 1 }, seed).unwrap();
        // Farthest node from anywhere is one end of a longest path.
        let first = bfs_from(&tree, 0).unwrap();
        let far = (0..tree.n()).max_by_key(|&i| (first[i], std::cmp::Reverse(i))).unwrap();
        let second = bfs_from(&tree, far).unwrap();
        assert_eq!(diameter(&tree).unwrap(), *second.iter().max().unwrap());
    }
}

/// Cliques of the given sizes joined in a ring by single edges.
fn ring_of_cliques(sizes: &[usize]) -> (Snapshot, Vec<usize>) {
    let mut edges = Vec::new();
    let mut labels = Vec::new();
    let mut starts = Vec::new();
    let mut next = 0;
    for (c, &s) in sizes.iter().enumerate() {
        starts.push(next);
        for i in 0..s {
            labels.push(c);
            for j in i + 1..s {
                edges.push((next + i, next + j));
            }
        }
        next += s;
    }
    for c in 0..sizes.len() {
        let d = (c + 1) % sizes.len();
        edges.push((starts[c] + sizes[c] - 1, starts[d]));
    }
    (Snapshot::from_edges(next, edges).unwrap(), labels)
}

#[test]
fn communities_are_invariant_under_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (g, truth) = ring_of_cliques(&[4, 5, 6, 4, 7, 5]);
    let base = detect_communities(&g, 3).unwrap();
    assert_eq!(base, Partition::from_labels(truth));
    for _ in 0..20 {
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut rng);
        let relabeled = Snapshot::from_edges(
            g.n(),
            g.edges().iter().map(|&(u, v)| (perm[u as usize], perm[v as usize])),
        )
        .unwrap();
        let found = detect_communities(&relabeled, 3).unwrap();
        let pulled_back = Partition::from_labels((0..g.n()).map(|i| found.label(perm[i])).collect());
        assert_eq!(pulled_back, base);
    }
}

/// Restricted growth strings enumerate every set partition exactly once.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0]];
    for _ in 1..n {
        let mut grown = Vec::new();
        for p in &out {
            let max = *p.iter().max().unwrap();
            for l in 0..=max + 1 {
                let mut q = p.clone();
                q.push(l);
                grown.push(q);
            }
        }
        out = grown;
    }
    out
}

#[test]
fn detector_never_loses_to_single_community_and_finds_clear_optima() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let g = random_graph(&mut rng, 7);
        if g.m() == 0 {
            continue;
        }
        let found = modularity(&g, &detect_communities(&g, 1).unwrap()).unwrap();
        let best = all_partitions(g.n())
            .into_iter()
            .map(|l| modularity(&g, &Partition::from_labels(l)).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(found >= 0.0);
        assert!(found <= best + 1e-12);
    }
}
