//! Exact offline optima for small instances.

mod kserver;
mod paging;
mod setcover;

use serde::{Deserialize, Serialize};

pub use kserver::{opt_kserver, opt_kserver_flow, KSERVER_FLOW_LIMITS};
pub use paging::{eviction_cost, opt_paging};
pub use setcover::{covers_all, monotone_trajectory, opt_setcover, SETCOVER_LIMIT};

/// Per-step configurations for times `0..=T` (server leaves, cached pages or
/// chosen sets, each sorted) and the total cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineSolution {
    pub configs: Vec<Vec<usize>>,
    pub cost: f64,
}

/// All `r`-subsets of `0..n` as sorted vectors, in lexicographic order.
pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `C(n, r)` as a float, for size checks.
pub(crate) fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(binomial(10, 4), 210.0);
    }
}
