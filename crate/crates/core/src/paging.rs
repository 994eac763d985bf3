//! Weighted (h,k)-paging by closed-form projection.
//!
//! The state `a ∈ [δ,1]^n` has `Σ a = n − h`; `a_i` is the fraction of page
//! `i` outside the cache. Serving `r` sets `a_r = δ` and scales every other
//! coordinate by `e^{λ/w_i}` (capped at 1), with `λ` fixing the mass.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::polytope::delta_for;

/// Tolerance of the per-step property checks.
pub const PAGING_TOL: f64 = 1e-10;

/// Validated paging parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagingParams {
    pub weights: Vec<f64>,
    pub k: usize,
    pub h: usize,
    pub delta: f64,
}

impl PagingParams {
    pub fn new(weights: Vec<f64>, k: usize, h: usize) -> Result<Self> {
        let n = weights.len();
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::param(format!("page weight {w} must be positive")));
        }
        if !(1 <= h && h <= k) {
            return Err(Error::param(format!("need 1 ≤ h ≤ k, got h={h}, k={k}")));
        }
        if k >= n {
            return Err(Error::param(format!("k = {k} must be smaller than the number of pages {n}")));
        }
        Ok(PagingParams { weights, k, h, delta: delta_for(k, h) })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Target mass `n − h`.
    pub fn mass(&self) -> f64 {
        (self.n() - self.h) as f64
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Starting point: `δ` on the cached pages, `(n−h−δk)/(n−k)` elsewhere.
pub fn paging_initial(params: &PagingParams, cache: &[usize]) -> Result<Vec<f64>> {
    let n = params.n();
    let mut seen = vec![false; n];
    for &p in cache {
        if p >= n {
            return Err(Error::param(format!("page {p} out of range")));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::param(format!("page {p} listed twice in the initial cache")));
        }
    }
    if cache.len() != params.k {
        return Err(Error::param(format!("expected {} initial pages, got {}", params.k, cache.len())));
    }
    let rest = (params.mass() - params.delta * params.k as f64) / (n - params.k) as f64;
    Ok(seen.iter().map(|&c| if c { params.delta } else { rest }).collect())
}

/// Projection of `a_prev` onto `{a_r ≤ δ}` within the paging polytope under
/// the weighted KL divergence. Returns the new point and `λ`.
pub fn paging_project(a_prev: &[f64], r: usize, params: &PagingParams) -> Result<(Vec<f64>, f64)> {
    let n = params.n();
    check_len(n, a_prev.len())?;
    if r >= n {
        return Err(Error::param(format!("request {r} out of range")));
    }
    let delta = params.delta;
    if a_prev[r] <= delta {
        return Ok((a_prev.to_vec(), 0.0));
    }
    if let Some(v) = a_prev.iter().find(|v| !(**v > 0.0 && **v <= 1.0 + PAGING_TOL)) {
        return Err(Error::Infeasible(format!("coordinate {v} outside (0,1]")));
    }
    let w = &params.weights;
    let target = params.mass();
    let mass = |lam: f64| -> f64 {
        let mut s = delta;
        for i in (0..n).filter(|&i| i != r) {
            s += (a_prev[i] * (lam / w[i]).exp()).min(1.0);
        }
        s
    };
    if delta + ((n - 1) as f64) < target {
        return Err(Error::Infeasible("mass n−h cannot be reached with the request at δ".into()));
    }
    let min_a = (0..n).filter(|&i| i != r).map(|i| a_prev[i]).fold(1.0, f64::min);
    let w_max = w.iter().copied().fold(0.0, f64::max);
    let mut lo = 0.0;
    let mut hi = w_max * (n as f64 / min_a).ln().max(1e-12);
    while mass(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = if (mass(lo) - target).abs() <= (mass(hi) - target).abs() { lo } else { hi };
    let a_new: Vec<f64> =
        (0..n).map(|i| if i == r { delta } else { (a_prev[i] * (lam / w[i]).exp()).min(1.0) }).collect();
    Ok((a_new, lam))
}

/// `Σ w_i |v_i|`.
pub fn weighted_l1(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x - y).abs()).sum()
}

/// `Σ w_i (a_i − b_i)^+`.
pub fn weighted_increase(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x - y).max(0.0)).sum()
}

/// `Φ(b‖a) = Σ_{b_i = 1} w_i log(1/a_i)`.
pub fn paging_potential(b: &[bool], a: &[f64], w: &[f64]) -> f64 {
    b.iter().zip(a).zip(w).filter(|((bi, _), _)| **bi).map(|((_, a), w)| -w * a.ln()).sum()
}

/// Weighted KL divergence `Σ w (p log(p/q) − p + q)`.
pub fn paging_divergence(p: &[f64], q: &[f64], w: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .zip(w)
        .map(|((&p, &q), w)| w * if p == 0.0 { q } else { p * (p / q).ln() - p + q })
        .sum()
}

/// Boolean anti-cache vector: `true` for pages not in `cache`.
pub fn outside(cache: &[usize], n: usize) -> Vec<bool> {
    let mut b = vec![true; n];
    for &p in cache {
        b[p] = false;
    }
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagingStepRecord {
    pub step: usize,
    pub request: usize,
    pub lambda: f64,
    pub movement: f64,
    pub positive_movement: f64,
    /// Worst violation among `a_r = δ`, monotone other coordinates and mass.
    pub property_residual: f64,
    pub potential_before: Option<f64>,
    pub potential_after: Option<f64>,
    /// `Σw(Δa)⁺ + ΔΦ − log(1/δ)·Σw(Δb)⁺`; nonpositive when the step is charged.
    pub charge_residual: Option<f64>,
    /// `D(a_new‖a_prev) − (D(b‖a_prev) − D(b‖a_new))`; nonpositive expected.
    pub pythagorean_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagingState {
    pub params: PagingParams,
    pub a: Vec<f64>,
    pub last_request: Option<usize>,
    pub step: usize,
    pub movement: f64,
    pub positive_movement: f64,
}

impl PagingState {
    pub fn new(params: PagingParams, cache: &[usize]) -> Result<Self> {
        let a = paging_initial(&params, cache)?;
        Ok(PagingState { params, a, last_request: None, step: 0, movement: 0.0, positive_movement: 0.0 })
    }

    pub fn serve(&mut self, r: usize) -> Result<(PagingStepRecord, Vec<f64>)> {
        let (a_new, lambda) = paging_project(&self.a, r, &self.params)?;
        let w = &self.params.weights;
        let a_prev = std::mem::replace(&mut self.a, a_new);
        let movement = weighted_l1(&self.a, &a_prev, w);
        let positive = weighted_increase(&self.a, &a_prev, w);
        self.step += 1;
        self.movement += movement;
        self.positive_movement += positive;
        self.last_request = Some(r);
        let record = PagingStepRecord {
            step: self.step,
            request: r,
            lambda,
            movement,
            positive_movement: positive,
            property_residual: property_residual(&a_prev, &self.a, r, &self.params),
            potential_before: None,
            potential_after: None,
            charge_residual: None,
            pythagorean_residual: None,
        };
        Ok((record, a_prev))
    }
}

/// Worst violation of `a_r = δ`, non-decreasing other coordinates and
/// `Σ a = n − h`.
pub fn property_residual(a_prev: &[f64], a_new: &[f64], r: usize, params: &PagingParams) -> f64 {
    let mut worst = (a_new[r] - params.delta).abs();
    for i in (0..a_new.len()).filter(|&i| i != r) {
        worst = worst.max(a_prev[i] - a_new[i]);
    }
    worst.max((a_new.iter().sum::<f64>() - params.mass()).abs())
}

/// Terms of the aggregate paging bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PagingBound {
    pub alg_movement: f64,
    pub alg_positive: f64,
    /// `Σ_t ‖Δb‖_{w,1}`.
    pub opt_movement: f64,
    /// Eviction cost `Σ_t Σ w (Δb)⁺`.
    pub opt_evictions: f64,
    pub phi_start: f64,
    pub phi_end: f64,
    /// `Φ(b⁰‖a⁰) + 2Σw`.
    pub additive: f64,
    /// `2 log(1/δ)·‖Δb‖ + Φ(b⁰‖a⁰) + 2Σw`.
    pub rhs: f64,
    /// `2 log(1/δ)·OPT_evict + 2Φ(b⁰‖a⁰) + Σw`, the bound obtained by
    /// summing the per-step charge and converting increases to movement.
    pub rhs_evictions: f64,
}

impl PagingBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.alg_movement <= self.rhs + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagingTrace {
    pub steps: Vec<PagingStepRecord>,
    pub movement: f64,
    pub positive_movement: f64,
    pub a_start: Vec<f64>,
    pub a_end: Vec<f64>,
    pub bound: Option<PagingBound>,
}

/// Runs the algorithm; with `comparator` (cache sets for times `0..=T`) every
/// step is charged against the comparator and the aggregate bound is formed.
pub fn paging_run(state: &mut PagingState, requests: &[usize], comparator: Option<&[Vec<usize>]>) -> Result<PagingTrace> {
    let n = state.params.n();
    if let Some(c) = comparator {
        if c.len() != requests.len() + 1 {
            return Err(Error::DimensionMismatch { expected: requests.len() + 1, got: c.len() });
        }
    }
    let bs: Option<Vec<Vec<bool>>> = comparator.map(|c| c.iter().map(|cache| outside(cache, n)).collect());
    let w = state.params.weights.clone();
    let log_inv_delta = (1.0 / state.params.delta).ln();
    let a_start = state.a.clone();
    let mut steps = Vec::with_capacity(requests.len());
    let (mut opt_movement, mut opt_evictions) = (0.0, 0.0);
    for (t, &r) in requests.iter().enumerate() {
        let (mut record, a_prev) = state.serve(r)?;
        if let Some(bs) = &bs {
            let (b_prev, b_new) = (&bs[t], &bs[t + 1]);
            if b_new[r] {
                return Err(Error::param(format!("comparator does not hold page {r} at step {}", t + 1)));
            }
            let bf = |b: &[bool]| -> Vec<f64> { b.iter().map(|&v| f64::from(u8::from(v))).collect() };
            let (fp, fnew) = (bf(b_prev), bf(b_new));
            let b_inc = weighted_increase(&fnew, &fp, &w);
            opt_evictions += b_inc;
            opt_movement += weighted_l1(&fnew, &fp, &w);
            let before = paging_potential(b_prev, &a_prev, &w);
            let after = paging_potential(b_new, &state.a, &w);
            record.potential_before = Some(before);
            record.potential_after = Some(after);
            record.charge_residual = Some(record.positive_movement + after - before - log_inv_delta * b_inc);
            let gain = paging_divergence(&fnew, &a_prev, &w) - paging_divergence(&fnew, &state.a, &w);
            record.pythagorean_residual = Some(paging_divergence(&state.a, &a_prev, &w) - gain);
        }
        steps.push(record);
    }
    let bound = bs.map(|bs| {
        let phi_start = paging_potential(&bs[0], &a_start, &w);
        let phi_end = paging_potential(&bs[bs.len() - 1], &state.a, &w);
        let total_w = state.params.total_weight();
        let additive = phi_start + 2.0 * total_w;
        PagingBound {
            alg_movement: state.movement,
            alg_positive: state.positive_movement,
            opt_movement,
            opt_evictions,
            phi_start,
            phi_end,
            additive,
            rhs: 2.0 * log_inv_delta * opt_movement + additive,
            rhs_evictions: 2.0 * log_inv_delta * opt_evictions + 2.0 * phi_start + total_w,
        }
    });
    Ok(PagingTrace {
        steps,
        movement: state.movement,
        positive_movement: state.positive_movement,
        a_start,
        a_end: state.a.clone(),
        bound,
    })
}
