use super::OfflineSolution;
use crate::error::{Error, Result};

/// Largest number of sets searched exhaustively.
pub const SETCOVER_LIMIT: usize = 20;

fn row_mask(row: &[bool]) -> u32 {
    row.iter().enumerate().filter(|(_, &b)| b).fold(0, |m, (i, _)| m | 1 << i)
}

/// Whether the chosen sets hit every row.
pub fn covers_all(chosen: &[usize], rows: &[Vec<bool>]) -> bool {
    rows.iter().all(|row| chosen.iter().any(|&i| row.get(i).copied().unwrap_or(false)))
}

/// Minimum-cardinality hitting set by enumeration of all `2^n` subsets,
/// returned as a trajectory that switches each chosen set on at the first
/// row containing it. Ties go to the numerically smallest bitmask.
pub fn opt_setcover(n: usize, rows: &[Vec<bool>]) -> Result<OfflineSolution> {
    if n > SETCOVER_LIMIT {
        return Err(Error::SizeLimit(format!("{n} sets exceed the exhaustive limit {SETCOVER_LIMIT}")));
    }
    if let Some(row) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
    }
    if rows.iter().any(|r| !r.iter().any(|&b| b)) {
        return Err(Error::Infeasible("a row covers no set".into()));
    }
    let masks: Vec<u32> = rows.iter().map(|r| row_mask(r)).collect();
    let mut best: Option<u32> = None;
    for m in 0u32..(1u32 << n) {
        if best.is_some_and(|b| m.count_ones() >= b.count_ones()) {
            continue;
        }
        if masks.iter().all(|&r| r & m != 0) {
            best = Some(m);
        }
    }
    let best = best.expect("the full family covers every nonzero row");
    let chosen: Vec<usize> = (0..n).filter(|&i| best >> i & 1 == 1).collect();
    Ok(OfflineSolution { configs: monotone_trajectory(&chosen, rows), cost: chosen.len() as f64 })
}

/// Sets of `chosen` switched on at the first row that contains them; entry
/// `t` lists the sets on after `t` rows.
pub fn monotone_trajectory(chosen: &[usize], rows: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let mut on: Vec<usize> = Vec::new();
    let mut out = vec![Vec::new()];
    for row in rows {
        for &i in chosen {
            if row[i] && !on.contains(&i) {
                on.push(i);
            }
        }
        on.sort_unstable();
        out.push(on.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let rows = vec![vec![true, false], vec![false, true]];
        assert_eq!(opt_setcover(2, &rows).unwrap().cost, 2.0);
        let rows = vec![vec![true, true, false], vec![true, false, true], vec![true, false, false]];
        let sol = opt_setcover(3, &rows).unwrap();
        assert_eq!(sol.cost, 1.0);
        assert_eq!(sol.configs, vec![vec![], vec![0], vec![0], vec![0]]);
        assert!(opt_setcover(2, &[vec![false, false]]).is_err());
    }
}
