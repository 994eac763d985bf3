//! Fixtures shared by the benchmarks.

use bregproj_core::harness::generate::{generate_hst, rng_from_seed};
use bregproj_core::kserver::KServerState;
use rand::Rng;

/// k-server state on a complete HST after `warmup` uniform requests, plus
/// the request to project for next.
pub fn warmed_kserver(branching: usize, depth: usize, k: usize, h: usize, warmup: usize, seed: u64) -> (KServerState, usize) {
    let tree = generate_hst(branching, depth, 0.1, 1.0).expect("valid HST parameters");
    let n = tree.num_leaves();
    let mut rng = rng_from_seed(seed);
    let servers = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let mut state = KServerState::new(tree, k, h, &servers).expect("valid server placement");
    for _ in 0..warmup {
        state.serve(rng.gen_range(0..n)).expect("projection converges");
    }
    let open: Vec<usize> = (0..n).filter(|&p| state.x[state.tree.leaf_atom(p)] > state.delta + 1e-6).collect();
    let r = open[rng.gen_range(0..open.len())];
    (state, r)
}
