use super::{binomial, combinations, OfflineSolution};
use crate::error::{Error, Result};

/// Largest `states · h · T` accepted by the paging DP.
const DP_WORK_LIMIT: f64 = 2e8;

/// Cost of moving from cache `from` to cache `to`: the weights of evicted pages.
pub fn eviction_cost(from: &[usize], to: &[usize], weights: &[f64]) -> f64 {
    from.iter().filter(|p| !to.contains(p)).map(|&p| weights[p]).sum()
}

/// Minimum eviction cost for a cache of `h` pages, by dynamic programming
/// over cache contents. Only demand paging is considered (evict exactly one
/// page on a miss), which loses nothing for eviction costs.
pub fn opt_paging(weights: &[f64], h: usize, requests: &[usize], initial: &[usize]) -> Result<OfflineSolution> {
    let n = weights.len();
    if h == 0 || h > n {
        return Err(Error::param(format!("cache size {h} must lie in 1..={n}")));
    }
    if initial.len() != h {
        return Err(Error::param(format!("expected {h} initial pages, got {}", initial.len())));
    }
    if let Some(p) = initial.iter().chain(requests).find(|&&p| p >= n) {
        return Err(Error::param(format!("page {p} out of range")));
    }
    let mut start = initial.to_vec();
    start.sort_unstable();
    if start.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("duplicate initial pages"));
    }
    if binomial(n, h) * h as f64 * requests.len().max(1) as f64 > DP_WORK_LIMIT {
        return Err(Error::SizeLimit(format!("C({n},{h}) caches over {} requests", requests.len())));
    }

    let configs = combinations(n, h);
    let mask = |c: &[usize]| c.iter().fold(0u64, |m, &p| m | 1 << p);
    let index: std::collections::HashMap<u64, usize> =
        configs.iter().enumerate().map(|(i, c)| (mask(c), i)).collect();
    let m = configs.len();
    let mut cur = vec![f64::INFINITY; m];
    cur[index[&mask(&start)]] = 0.0;
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(requests.len());
    for &r in requests {
        let mut next = vec![f64::INFINITY; m];
        let mut arg = vec![usize::MAX; m];
        for i in 0..m {
            if !cur[i].is_finite() {
                continue;
            }
            let c = &configs[i];
            if c.contains(&r) {
                if cur[i] < next[i] {
                    next[i] = cur[i];
                    arg[i] = i;
                }
                continue;
            }
            let base = mask(c) | 1 << r;
            for &out in c {
                let j = index[&(base & !(1 << out))];
                let v = cur[i] + weights[out];
                if v < next[j] {
                    next[j] = v;
                    arg[j] = i;
                }
            }
        }
        back.push(arg);
        cur = next;
    }
    let mut at = (0..m).fold(0, |b, j| if cur[j] < cur[b] { j } else { b });
    let mut path = vec![at];
    for arg in back.iter().rev() {
        at = arg[at];
        path.push(at);
    }
    path.reverse();
    let configs: Vec<Vec<usize>> = path.iter().map(|&i| configs[i].clone()).collect();
    let cost = configs.windows(2).map(|w| eviction_cost(&w[0], &w[1], weights)).sum();
    Ok(OfflineSolution { configs, cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_cache_costs_nothing() {
        let sol = opt_paging(&[1.0, 2.0], 2, &[0, 1, 0, 1], &[0, 1]).unwrap();
        assert_eq!(sol.cost, 0.0);
    }

    #[test]
    fn alternating_unit_weights() {
        let sol = opt_paging(&[1.0, 1.0], 1, &[0, 1, 0, 1], &[0]).unwrap();
        assert_eq!(sol.cost, 3.0);
        assert_eq!(sol.configs, vec![vec![0], vec![0], vec![1], vec![0], vec![1]]);
    }

    #[test]
    fn weighted_single_slot_must_evict_both() {
        // With one slot every switch evicts the page held before it.
        let sol = opt_paging(&[1.0, 10.0], 1, &[1, 0, 1, 0], &[1]).unwrap();
        assert_eq!(sol.cost, 21.0);
    }

    #[test]
    fn cheap_page_is_evicted() {
        // Two slots, three pages: the heavy page 2 stays, 0 and 1 share a slot.
        let sol = opt_paging(&[1.0, 1.0, 10.0], 2, &[2, 0, 1, 0, 1, 2], &[0, 2]).unwrap();
        assert_eq!(sol.cost, 3.0);
    }
}
