//! Offline solvers against second implementations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use bregproj_core::harness::generate::{random_tree, rng_from_seed, RandomTreeParams};
use bregproj_core::offline::{
    covers_all, eviction_cost, opt_kserver, opt_kserver_flow, opt_paging, opt_setcover, OfflineSolution,
};
use bregproj_core::tree::{server_distance, ServerVector, WeightedTree};

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == r)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

/// Cheapest perfect matching between two configurations by enumerating
/// permutations of the second.
fn matching_cost(tree: &WeightedTree, a: &[usize], b: &[usize]) -> f64 {
    permutations(b)
        .iter()
        .map(|p| a.iter().zip(p).map(|(&x, &y)| tree.leaf_distance(x, y)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Configuration DP whose transitions are matchings between leaf sets.
fn matching_dp(tree: &WeightedTree, h: usize, requests: &[usize], initial: &[usize]) -> f64 {
    let configs = subsets(tree.num_leaves(), h);
    let m = configs.len();
    let cost: Vec<Vec<f64>> =
        configs.iter().map(|a| configs.iter().map(|b| matching_cost(tree, a, b)).collect()).collect();
    let mut start = initial.to_vec();
    start.sort_unstable();
    let mut cur: Vec<f64> = configs.iter().map(|c| if *c == start { 0.0 } else { f64::INFINITY }).collect();
    for &r in requests {
        let mut next = vec![f64::INFINITY; m];
        for j in (0..m).filter(|&j| configs[j].contains(&r)) {
            next[j] = (0..m).map(|i| cur[i] + cost[i][j]).fold(f64::INFINITY, f64::min);
        }
        cur = next;
    }
    cur.into_iter().fold(f64::INFINITY, f64::min)
}

fn resimulated_kserver_cost(tree: &WeightedTree, sol: &OfflineSolution, requests: &[usize]) -> f64 {
    for (t, &r) in requests.iter().enumerate() {
        assert!(sol.configs[t + 1].contains(&r), "configuration {} misses request {r}", t + 1);
    }
    sol.configs
        .windows(2)
        .map(|w| {
            let a = ServerVector::from_leaves(tree, &w[0]).unwrap();
            let b = ServerVector::from_leaves(tree, &w[1]).unwrap();
            server_distance(&a, &b, tree).unwrap()
        })
        .sum()
}

fn small_tree(rng: &mut ChaCha8Rng, max_leaves: usize) -> WeightedTree {
    loop {
        let depth = rng.gen_range(1..=3);
        let ratio = [1.0, 0.5, 0.2][rng.gen_range(0..3)];
        let t = random_tree(&RandomTreeParams { depth, max_children: 3, max_leaves, ratio }, rng).unwrap();
        if t.num_leaves() >= 3 {
            return t;
        }
    }
}

#[test]
fn kserver_dp_matches_matching_dp_and_flow() {
    let mut rng = rng_from_seed(71);
    for _ in 0..40 {
        let tree = small_tree(&mut rng, 6);
        let n = tree.num_leaves();
        let h = rng.gen_range(1..=3.min(n - 1));
        let initial = rand::seq::index::sample(&mut rng, n, h).into_vec();
        let requests: Vec<usize> = (0..rng.gen_range(1..12)).map(|_| rng.gen_range(0..n)).collect();

        let dp = opt_kserver(&tree, h, &requests, &initial).unwrap();
        let flow = opt_kserver_flow(&tree, h, &requests, &initial).unwrap();
        let reference = matching_dp(&tree, h, &requests, &initial);
        let scale = dp.cost.max(1.0);
        assert!((dp.cost - reference).abs() <= 1e-9 * scale, "dp {} vs matching {}", dp.cost, reference);
        assert!((dp.cost - flow.cost).abs() <= 1e-9 * scale, "dp {} vs flow {}", dp.cost, flow.cost);
        assert!((resimulated_kserver_cost(&tree, &dp, &requests) - dp.cost).abs() <= 1e-9 * scale);
        assert!((resimulated_kserver_cost(&tree, &flow, &requests) - flow.cost).abs() <= 1e-9 * scale);
        assert_eq!(dp.configs.len(), requests.len() + 1);
    }
}

/// Paging DP allowing any cache change per step, not only demand evictions.
fn full_paging_dp(weights: &[f64], h: usize, requests: &[usize], initial: &[usize]) -> f64 {
    let configs = subsets(weights.len(), h);
    let evict = |a: &[usize], b: &[usize]| a.iter().filter(|p| !b.contains(p)).map(|&p| weights[p]).sum::<f64>();
    let mut start = initial.to_vec();
    start.sort_unstable();
    let mut cur: Vec<f64> = configs.iter().map(|c| if *c == start { 0.0 } else { f64::INFINITY }).collect();
    for &r in requests {
        cur = configs
            .iter()
            .map(|b| {
                if !b.contains(&r) {
                    return f64::INFINITY;
                }
                configs.iter().zip(&cur).map(|(a, c)| c + evict(a, b)).fold(f64::INFINITY, f64::min)
            })
            .collect();
    }
    cur.into_iter().fold(f64::INFINITY, f64::min)
}

#[test]
fn paging_lazy_dp_matches_full_dp() {
    let mut rng = rng_from_seed(72);
    for _ in 0..60 {
        let n = rng.gen_range(2..=7);
        let h = rng.gen_range(1..n);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..100.0)).collect();
        let initial = rand::seq::index::sample(&mut rng, n, h).into_vec();
        let requests: Vec<usize> = (0..rng.gen_range(0..15)).map(|_| rng.gen_range(0..n)).collect();
        let sol = opt_paging(&weights, h, &requests, &initial).unwrap();
        let full = full_paging_dp(&weights, h, &requests, &initial);
        assert!((sol.cost - full).abs() <= 1e-9 * full.max(1.0), "lazy {} vs full {}", sol.cost, full);
        let replay: f64 = sol.configs.windows(2).map(|w| eviction_cost(&w[0], &w[1], &weights)).sum();
        assert!((replay - sol.cost).abs() <= 1e-9 * full.max(1.0));
        for (t, &r) in requests.iter().enumerate() {
            assert!(sol.configs[t + 1].contains(&r));
            assert_eq!(sol.configs[t + 1].len(), h);
        }
    }
}

/// Smallest hitting set by branching on the sets of the first unhit row.
fn branch_hitting(rows: &[Vec<bool>], chosen: &mut Vec<usize>, best: &mut usize) {
    if chosen.len() >= *best {
        return;
    }
    let Some(row) = rows.iter().find(|r| !chosen.iter().any(|&i| r[i])) else {
        *best = chosen.len();
        return;
    };
    for i in (0..row.len()).filter(|&i| row[i]) {
        chosen.push(i);
        branch_hitting(rows, chosen, best);
        chosen.pop();
    }
}

#[test]
fn setcover_exhaustive_matches_branching() {
    let mut rng = rng_from_seed(73);
    for _ in 0..60 {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(1..=20);
        let rows: Vec<Vec<bool>> = (0..m)
            .map(|_| loop {
                let r: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
                if r.contains(&true) {
                    break r;
                }
            })
            .collect();
        let sol = opt_setcover(n, &rows).unwrap();
        let mut best = n + 1;
        branch_hitting(&rows, &mut Vec::new(), &mut best);
        assert_eq!(sol.cost, best as f64);

        let last = sol.configs.last().unwrap();
        assert_eq!(last.len(), best);
        assert!(covers_all(last, &rows));
        for w in sol.configs.windows(2) {
            assert!(w[0].iter().all(|i| w[1].contains(i)), "trajectory switches a set off");
        }
        for (t, row) in rows.iter().enumerate() {
            assert!(sol.configs[t + 1].iter().any(|&i| row[i]), "row {t} uncovered at its arrival");
        }
    }
}

#[test]
fn size_limits_are_reported() {
    let rows = vec![vec![true; 21]];
    assert!(matches!(opt_setcover(21, &rows), Err(bregproj_core::Error::SizeLimit(_))));
    let tree = {
        let mut rng = rng_from_seed(74);
        small_tree(&mut rng, 6)
    };
    let requests = vec![0; 201];
    assert!(matches!(opt_kserver_flow(&tree, 1, &requests, &[0]), Err(bregproj_core::Error::SizeLimit(_))));
}
