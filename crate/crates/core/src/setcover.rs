//! Online fractional set cover by KL projection.
//!
//! Start at `a_i = 1/n`. When row `t` arrives uncovered, the projection onto
//! `{⟨row, a⟩ ≥ 1}` multiplies its entries by `e^λ` until the row sums to 1.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Closed-form projection for a Boolean row. Returns the new point and `λ`.
pub fn sc_project(a_prev: &[f64], row: &[bool]) -> Result<(Vec<f64>, f64)> {
    check_len(a_prev.len(), row.len())?;
    if !row.iter().any(|&b| b) {
        return Err(Error::Infeasible("row covers no set".into()));
    }
    if let Some(v) = a_prev.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::param(format!("coordinate {v} must be positive")));
    }
    let s: f64 = a_prev.iter().zip(row).filter(|(_, &b)| b).map(|(a, _)| a).sum();
    if s >= 1.0 {
        return Ok((a_prev.to_vec(), 0.0));
    }
    let a_new = a_prev.iter().zip(row).map(|(&a, &b)| if b { a / s } else { a }).collect();
    Ok((a_new, (1.0 / s).ln()))
}

/// Projection onto `{⟨c, a⟩ ≥ 1}` for a nonnegative real row `c`; `λ` by
/// bisection on `⟨c, a·e^{λc}⟩ = 1`.
pub fn sc_project_general(a_prev: &[f64], row: &[f64]) -> Result<(Vec<f64>, f64)> {
    check_len(a_prev.len(), row.len())?;
    if row.iter().any(|c| !(*c >= 0.0 && c.is_finite())) || !row.iter().any(|&c| c > 0.0) {
        return Err(Error::Infeasible("row must be nonnegative and nonzero".into()));
    }
    let value = |lam: f64| -> f64 { a_prev.iter().zip(row).map(|(a, c)| c * a * (lam * c).exp()).sum() };
    if value(0.0) >= 1.0 {
        return Ok((a_prev.to_vec(), 0.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while value(hi) < 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if value(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((a_prev.iter().zip(row).map(|(a, c)| a * (hi * c).exp()).collect(), hi))
}

/// `Σ_i p log(p/q)` with `0 log 0 = 0`.
pub fn kl_shadow(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&p, &q)| if p == 0.0 { 0.0 } else { p * (p / q).ln() }).sum()
}

/// `Φ(b‖a) = Σ_{b_i = 1} log(1/a_i)`.
pub fn sc_potential(b: &[bool], a: &[f64]) -> f64 {
    b.iter().zip(a).filter(|(b, _)| **b).map(|(_, a)| -a.ln()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetCoverStepRecord {
    pub step: usize,
    pub lambda: f64,
    pub cost: f64,
    pub increase: f64,
    /// Largest shortfall `1 − ⟨row, a⟩` over the rows seen so far, or
    /// decrease of a coordinate in this step.
    pub feasibility_residual: f64,
    /// `Pdiv(aᵗ‖aᵗ⁻¹) + Φ(bᵗ‖aᵗ) − Φ(bᵗ‖aᵗ⁻¹)`; nonpositive expected.
    pub starred_residual: Option<f64>,
    /// `Φ(bᵗ‖aᵗ⁻¹) − Φ(bᵗ⁻¹‖aᵗ⁻¹) − log(n)·|bᵗ \ bᵗ⁻¹|`; nonpositive expected.
    pub opt_charge_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetCoverState {
    pub a: Vec<f64>,
    pub rows: Vec<Vec<bool>>,
}

impl SetCoverState {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("set cover needs at least one set"));
        }
        Ok(SetCoverState { a: vec![1.0 / n as f64; n], rows: Vec::new() })
    }

    pub fn cost(&self) -> f64 {
        self.a.iter().sum()
    }

    pub fn serve(&mut self, row: &[bool]) -> Result<(f64, Vec<f64>)> {
        let (a_new, lambda) = sc_project(&self.a, row)?;
        self.rows.push(row.to_vec());
        Ok((lambda, std::mem::replace(&mut self.a, a_new)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetCoverTrace {
    pub steps: Vec<SetCoverStepRecord>,
    pub final_cost: f64,
    pub a_end: Vec<f64>,
    /// Whether the comparator only switches sets on; audits are skipped otherwise.
    pub comparator_monotone: Option<bool>,
}

fn feasibility_residual(state: &SetCoverState, a_prev: &[f64]) -> f64 {
    let mut worst = a_prev.iter().zip(&state.a).map(|(p, q)| p - q).fold(0.0, f64::max);
    for row in &state.rows {
        let s: f64 = state.a.iter().zip(row).filter(|(_, &b)| b).map(|(a, _)| a).sum();
        worst = worst.max(1.0 - s);
    }
    worst
}

/// Runs the algorithm; `comparator` holds chosen-set lists for times `0..=T`.
pub fn sc_run(n: usize, rows: &[Vec<bool>], comparator: Option<&[Vec<usize>]>) -> Result<SetCoverTrace> {
    let mut state = SetCoverState::new(n)?;
    if let Some(c) = comparator {
        if c.len() != rows.len() + 1 {
            return Err(Error::DimensionMismatch { expected: rows.len() + 1, got: c.len() });
        }
    }
    let bs: Option<Vec<Vec<bool>>> = comparator.map(|c| {
        c.iter()
            .map(|sets| {
                let mut b = vec![false; n];
                sets.iter().filter(|&&i| i < n).for_each(|&i| b[i] = true);
                b
            })
            .collect()
    });
    let monotone = bs.as_ref().map(|bs| bs.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(p, q)| !p || *q)));
    let log_n = (n as f64).ln();
    let mut steps = Vec::with_capacity(rows.len());
    for (t, row) in rows.iter().enumerate() {
        let (lambda, a_prev) = state.serve(row)?;
        let mut rec = SetCoverStepRecord {
            step: t + 1,
            lambda,
            cost: state.cost(),
            increase: state.a.iter().zip(&a_prev).map(|(x, y)| x - y).sum(),
            feasibility_residual: feasibility_residual(&state, &a_prev),
            starred_residual: None,
            opt_charge_residual: None,
        };
        if let (Some(bs), Some(true)) = (&bs, monotone) {
            let (b_prev, b_new) = (&bs[t], &bs[t + 1]);
            let flips = b_new.iter().zip(b_prev).filter(|(q, p)| **q && !**p).count() as f64;
            rec.opt_charge_residual =
                Some(sc_potential(b_new, &a_prev) - sc_potential(b_prev, &a_prev) - log_n * flips);
            rec.starred_residual =
                Some(kl_shadow(&state.a, &a_prev) + sc_potential(b_new, &state.a) - sc_potential(b_new, &a_prev));
        }
        steps.push(rec);
    }
    Ok(SetCoverTrace { steps, final_cost: state.cost(), a_end: state.a, comparator_monotone: monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        let (a, lam) = sc_project(&[0.5, 0.5], &[true, true]).unwrap();
        assert_eq!((a, lam), (vec![0.5, 0.5], 0.0));
        let (a, lam) = sc_project(&[0.5, 0.5], &[true, false]).unwrap();
        assert!((lam - 2f64.ln()).abs() < 1e-15);
        assert_eq!(a, vec![1.0, 0.5]);
        let (a, lam) = sc_project(&[0.25, 0.25], &[true, true]).unwrap();
        assert!((lam - 2f64.ln()).abs() < 1e-15);
        assert_eq!(a, vec![0.5, 0.5]);
        assert!(sc_project(&[0.5, 0.5], &[false, false]).is_err());
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        let a = [0.1, 0.3, 0.05, 0.2];
        let row = [true, false, true, true];
        let (x, l) = sc_project(&a, &row).unwrap();
        let real: Vec<f64> = row.iter().map(|&b| f64::from(u8::from(b))).collect();
        let (y, m) = sc_project_general(&a, &real).unwrap();
        assert!((l - m).abs() < 1e-12);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_single_row() {
        let n = 5;
        let row: Vec<bool> = (0..n).map(|i| i == 0).collect();
        let trace = sc_run(n, &vec![row; 4], None).unwrap();
        let expect = 1.0 + (n as f64 - 1.0) / n as f64;
        assert!((trace.steps[0].cost - expect).abs() < 1e-15);
        assert!(trace.steps[1..].iter().all(|s| s.lambda == 0.0 && s.cost == trace.steps[0].cost));
    }

    #[test]
    fn empty_rows_cost_one() {
        let trace = sc_run(7, &[], None).unwrap();
        assert!((trace.final_cost - 1.0).abs() < 1e-15);
    }
}
