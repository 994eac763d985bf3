//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{NodeRecord, WeightedTree};

/// Name of the random generator recorded in every output.
pub const RNG_NAME: &str = "ChaCha8";

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn child_id(parent: &str, i: usize) -> String {
    format!("{parent}.{i}")
}

/// Complete `branching`-ary tree of the given depth with weight
/// `root_weight · ρ^d` at depth `d`.
pub fn generate_hst(branching: usize, depth: usize, ratio: f64, root_weight: f64) -> Result<WeightedTree> {
    if branching < 2 {
        return Err(Error::param(format!("branching {branching} must be at least 2")));
    }
    if depth < 1 {
        return Err(Error::param("depth must be at least 1"));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::param(format!("ratio {ratio} must lie in (0,1]")));
    }
    if !(root_weight > 0.0 && root_weight.is_finite()) {
        return Err(Error::param(format!("root weight {root_weight} must be positive")));
    }
    let leaves = (branching as f64).powi(depth as i32);
    if leaves > 1e6 {
        return Err(Error::SizeLimit(format!("{leaves} leaves")));
    }
    let mut records = vec![NodeRecord { id: "r".into(), parent: None, weight: root_weight }];
    let mut frontier = vec!["r".to_string()];
    for d in 1..=depth {
        let w = root_weight * ratio.powi(d as i32);
        let mut next = Vec::with_capacity(frontier.len() * branching);
        for p in &frontier {
            for i in 0..branching {
                let id = child_id(p, i);
                records.push(NodeRecord { id: id.clone(), parent: Some(p.clone()), weight: w });
                next.push(id);
            }
        }
        frontier = next;
    }
    WeightedTree::from_records(records)
}

/// Shape and weight ranges of random uniform-depth trees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomTreeParams {
    pub depth: usize,
    pub max_children: usize,
    pub max_leaves: usize,
    /// Per-level weight ratio; each node draws a factor in `[0.5, 1.5]` on top.
    pub ratio: f64,
}

/// Random tree with all leaves at `depth`, at least two leaves and at most
/// `max_leaves`.
pub fn random_tree(params: &RandomTreeParams, rng: &mut impl Rng) -> Result<WeightedTree> {
    let RandomTreeParams { depth, max_children, max_leaves, ratio } = *params;
    if depth < 1 || max_children < 2 || max_leaves < 2 {
        return Err(Error::param("random tree needs depth ≥ 1, max_children ≥ 2, max_leaves ≥ 2"));
    }
    let mut records = vec![NodeRecord { id: "r".into(), parent: None, weight: rng.gen_range(0.5..1.5) }];
    let mut frontier = vec!["r".to_string()];
    for d in 1..=depth {
        let scale = ratio.powi(d as i32);
        let mut next: Vec<String> = Vec::new();
        let count = frontier.len();
        for (idx, p) in frontier.iter().enumerate() {
            let remaining_parents = count - idx - 1;
            let budget = max_leaves - next.len() - remaining_parents;
            let lo = if d == 1 { 2 } else { 1 };
            let c = rng.gen_range(lo..=max_children).min(budget).max(1);
            for i in 0..c {
                let id = child_id(p, i);
                records.push(NodeRecord { id: id.clone(), parent: Some(p.clone()), weight: scale * rng.gen_range(0.5..1.5) });
                next.push(id);
            }
        }
        frontier = next;
    }
    WeightedTree::from_records(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestModel {
    UniformRandom,
    #[serde(rename = "cyclic_k_plus_1")]
    CyclicKPlus1,
    AdversarialGreedy,
}

impl std::str::FromStr for RequestModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_random" | "uniform-random" => Ok(RequestModel::UniformRandom),
            "cyclic_k_plus_1" | "cyclic-k-plus-1" => Ok(RequestModel::CyclicKPlus1),
            "adversarial_greedy" | "adversarial-greedy" => Ok(RequestModel::AdversarialGreedy),
            other => Err(Error::param(format!("unknown request model {other:?}"))),
        }
    }
}

pub fn uniform_requests(n: usize, len: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..len).map(|_| rng.gen_range(0..n)).collect()
}

/// `k+1` distinct positions drawn from `0..n`, requested in a fixed cycle.
pub fn cyclic_requests(n: usize, k: usize, len: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if k + 1 > n {
        return Err(Error::param(format!("cyclic pattern needs k+1 = {} ≤ n = {n}", k + 1)));
    }
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    let mut chosen = pool[..=k].to_vec();
    chosen.sort_unstable();
    Ok((0..len).map(|t| chosen[t % (k + 1)]).collect())
}

/// Position of the largest value, smallest index on ties.
pub fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
