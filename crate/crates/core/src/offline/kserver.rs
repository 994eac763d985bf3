use std::collections::BTreeSet;

use super::{binomial, combinations, OfflineSolution};
use crate::error::{Error, Result};
use crate::tree::{server_distance, ServerVector, WeightedTree};

/// Largest `states² · T` accepted by the configuration DP.
const DP_WORK_LIMIT: f64 = 4e8;

/// `(h, T)` limits of the flow formulation.
pub const KSERVER_FLOW_LIMITS: (usize, usize) = (3, 200);

fn validate(tree: &WeightedTree, h: usize, requests: &[usize], initial: &[usize]) -> Result<()> {
    let n = tree.num_leaves();
    if h == 0 || h > n {
        return Err(Error::param(format!("h = {h} must lie in 1..={n}")));
    }
    if initial.len() != h {
        return Err(Error::param(format!("expected {h} initial servers, got {}", initial.len())));
    }
    let distinct: BTreeSet<usize> = initial.iter().copied().collect();
    if distinct.len() != h {
        return Err(Error::param("duplicate initial server leaves"));
    }
    if let Some(p) = initial.iter().chain(requests).find(|&&p| p >= n) {
        return Err(Error::param(format!("leaf position {p} out of range")));
    }
    Ok(())
}

/// Minimum total movement of `h` servers serving `requests`, by dynamic
/// programming over `h`-subsets of leaves. Transition costs use the subtree
/// form of the distance, which equals the optimal matching cost on a tree.
pub fn opt_kserver(tree: &WeightedTree, h: usize, requests: &[usize], initial: &[usize]) -> Result<OfflineSolution> {
    validate(tree, h, requests, initial)?;
    let n = tree.num_leaves();
    let states = binomial(n, h);
    if states * states * (requests.len().max(1) as f64) > DP_WORK_LIMIT {
        return Err(Error::SizeLimit(format!("{states} configurations over {} requests", requests.len())));
    }
    let configs = combinations(n, h);
    let m = configs.len();
    let vectors: Vec<ServerVector> =
        configs.iter().map(|c| ServerVector::from_leaves(tree, c)).collect::<Result<_>>()?;
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let d = server_distance(&vectors[i], &vectors[j], tree)?;
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }

    let mut start: Vec<usize> = initial.to_vec();
    start.sort_unstable();
    let s0 = configs.iter().position(|c| *c == start).expect("initial configuration enumerated");
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(requests.len());
    let mut cur = vec![f64::INFINITY; m];
    cur[s0] = 0.0;
    for &r in requests {
        let mut next = vec![f64::INFINITY; m];
        let mut arg = vec![usize::MAX; m];
        for j in 0..m {
            if !configs[j].contains(&r) {
                continue;
            }
            for i in 0..m {
                if cur[i].is_finite() {
                    let v = cur[i] + dist[i * m + j];
                    if v < next[j] {
                        next[j] = v;
                        arg[j] = i;
                    }
                }
            }
        }
        back.push(arg);
        cur = next;
    }

    let (mut best, mut at) = (f64::INFINITY, s0);
    for (j, &v) in cur.iter().enumerate() {
        if v < best {
            best = v;
            at = j;
        }
    }
    let mut path = vec![at];
    for arg in back.iter().rev() {
        at = arg[at];
        path.push(at);
    }
    path.reverse();
    let out: Vec<Vec<usize>> = path.iter().map(|&i| configs[i].clone()).collect();
    let total = path.windows(2).map(|w| dist[w[0] * m + w[1]]).sum();
    Ok(OfflineSolution { configs: out, cost: total })
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    cap: i32,
    cost: f64,
}

struct Network {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network { adj: vec![Vec::new(); nodes], edges: Vec::new() }
    }

    fn add(&mut self, from: usize, to: usize, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap: 1, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
    }

    /// Shortest residual path by Bellman–Ford; returns the edge list.
    fn shortest_path(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let nn = self.adj.len();
        let mut dist = vec![f64::INFINITY; nn];
        let mut via = vec![usize::MAX; nn];
        dist[s] = 0.0;
        for _ in 0..nn {
            let mut changed = false;
            for u in 0..nn {
                if !dist[u].is_finite() {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = self.edges[e];
                    if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] - 1e-12 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[t].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let e = via[v];
            path.push(e);
            v = self.edges[e ^ 1].to;
        }
        path.reverse();
        Some(path)
    }
}

/// The same optimum through a time-expanded min-cost flow: one unit per
/// server, each request a unit edge with a large negative cost that every
/// optimal flow saturates.
pub fn opt_kserver_flow(
    tree: &WeightedTree,
    h: usize,
    requests: &[usize],
    initial: &[usize],
) -> Result<OfflineSolution> {
    validate(tree, h, requests, initial)?;
    let (h_max, t_max) = KSERVER_FLOW_LIMITS;
    if h > h_max || requests.len() > t_max {
        return Err(Error::SizeLimit(format!("flow formulation supports h ≤ {h_max}, T ≤ {t_max}")));
    }
    let t_len = requests.len();
    let leaf_dist = |a: usize, b: usize| tree.leaf_distance(a, b);
    let max_d = (0..tree.num_leaves())
        .flat_map(|a| (0..tree.num_leaves()).map(move |b| (a, b)))
        .map(|(a, b)| leaf_dist(a, b))
        .fold(0.0, f64::max);
    let big = 2.0 * (t_len as f64 + 1.0) * max_d + 1.0;

    // Nodes: source, sink, h starts, then (in, out) per request.
    let (source, sink) = (0, 1);
    let start = |i: usize| 2 + i;
    let node_in = |t: usize| 2 + h + 2 * t;
    let node_out = |t: usize| 3 + h + 2 * t;
    let mut net = Network::new(2 + h + 2 * t_len);
    for (i, &p) in initial.iter().enumerate() {
        net.add(source, start(i), 0.0);
        net.add(start(i), sink, 0.0);
        for (t, &r) in requests.iter().enumerate() {
            net.add(start(i), node_in(t), leaf_dist(p, r));
        }
    }
    for (t, &r) in requests.iter().enumerate() {
        net.add(node_in(t), node_out(t), -big);
        net.add(node_out(t), sink, 0.0);
        for (u, &q) in requests.iter().enumerate().skip(t + 1) {
            net.add(node_out(t), node_in(u), leaf_dist(r, q));
        }
    }
    for _ in 0..h {
        let path = net.shortest_path(source, sink).ok_or_else(|| Error::Infeasible("flow network".into()))?;
        for e in path {
            net.edges[e].cap -= 1;
            net.edges[e ^ 1].cap += 1;
        }
    }

    // Walk each server's route through saturated forward edges.
    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); h];
    let mut served = vec![false; t_len];
    for (i, route) in routes.iter_mut().enumerate() {
        let mut v = start(i);
        while let Some(e) = net.adj[v].iter().copied().find(|&e| e % 2 == 0 && net.edges[e].cap == 0) {
            let to = net.edges[e].to;
            if to == sink {
                break;
            }
            let t = (to - 2 - h) / 2;
            route.push(t);
            served[t] = true;
            v = node_out(t);
        }
    }
    let mut position: Vec<Vec<usize>> = Vec::with_capacity(t_len + 1);
    for time in 0..=t_len {
        position.push(
            routes
                .iter()
                .enumerate()
                .map(|(i, route)| route.iter().rev().find(|&&t| t < time).map_or(initial[i], |&t| requests[t]))
                .collect(),
        );
    }
    if served.iter().any(|s| !s) {
        return Err(Error::Infeasible("flow left a request unserved".into()));
    }
    for c in position.iter_mut() {
        c.sort_unstable();
    }
    let mut total = 0.0;
    for w in position.windows(2) {
        total += server_distance(&ServerVector::from_leaves(tree, &w[0])?, &ServerVector::from_leaves(tree, &w[1])?, tree)?;
    }
    Ok(OfflineSolution { configs: position, cost: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::NodeRecord;

    fn rec(id: &str, parent: Option<&str>, weight: f64) -> NodeRecord {
        NodeRecord { id: id.into(), parent: parent.map(Into::into), weight }
    }

    #[test]
    fn star_alternating() {
        let t = WeightedTree::from_records(vec![rec("r", None, 1.0), rec("u", Some("r"), 1.0), rec("v", Some("r"), 1.0)])
            .unwrap();
        let sol = opt_kserver(&t, 1, &[0, 1, 0], &[0]).unwrap();
        assert_eq!(sol.cost, 4.0);
        assert_eq!(sol.configs, vec![vec![0], vec![0], vec![1], vec![0]]);
        let flow = opt_kserver_flow(&t, 1, &[0, 1, 0], &[0]).unwrap();
        assert_eq!(flow.cost, 4.0);
        assert_eq!(opt_kserver(&t, 1, &[0, 0, 0], &[0]).unwrap().cost, 0.0);
    }

    #[test]
    fn requests_inside_one_subtree() {
        let mut recs = vec![rec("r", None, 4.0)];
        for m in ["a", "b"] {
            recs.push(rec(m, Some("r"), 2.0));
            for i in 0..2 {
                recs.push(rec(&format!("{m}{i}"), Some(m), 1.0));
            }
        }
        let t = WeightedTree::from_records(recs).unwrap();
        // servers at a0 and b0; requests alternate a0, a1: one relocation of
        // the b server into subtree a costs 1+2+2+1 = 6, versus 2 per switch.
        let reqs = [1, 0, 1, 0, 1, 0, 1];
        let dp = opt_kserver(&t, 2, &reqs, &[0, 2]).unwrap();
        let flow = opt_kserver_flow(&t, 2, &reqs, &[0, 2]).unwrap();
        assert_eq!(dp.cost, 6.0);
        assert!((dp.cost - flow.cost).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let t = WeightedTree::from_records(vec![rec("r", None, 1.0), rec("u", Some("r"), 1.0), rec("v", Some("r"), 1.0)])
            .unwrap();
        assert!(opt_kserver(&t, 1, &[0], &[0, 1]).is_err());
        assert!(opt_kserver(&t, 2, &[0], &[1, 1]).is_err());
        assert!(opt_kserver(&t, 1, &[5], &[0]).is_err());
    }
}
