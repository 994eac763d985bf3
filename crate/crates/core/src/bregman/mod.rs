//! Shifted multiscale entropy: divergences, potentials and projections.
//!
//! The generator is `h(x) = Σ_u w_u Σ_j x̃_{u,j} log x̃_{u,j}` with
//! `x̃ = x + shift`; its Bregman divergence is
//! `D(x‖x') = Σ_u w_u Σ_j (x̃ log(x̃/x̃') − x̃ + x̃')`. The shift is stored in
//! [`DivergenceParams`] and applied on the fly, never to stored vectors.

mod certificate;
pub mod reference;
mod solver;

pub use certificate::{DualCertificate, KktTerms};
pub use solver::{project, ProjectionDiagnostics, ProjectionOptions, ProjectionResult};

use crate::error::{check_len, Error, Result};
use crate::tree::{AtomVector, WeightedTree};

#[derive(Debug, Clone, Copy)]
pub struct DivergenceParams<'a> {
    pub tree: &'a WeightedTree,
    pub shift: f64,
}

impl<'a> DivergenceParams<'a> {
    pub fn new(tree: &'a WeightedTree, shift: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&shift) {
            return Err(Error::param(format!("divergence shift {shift} must lie in [0,1)")));
        }
        Ok(DivergenceParams { tree, shift })
    }

    fn atom_weights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.tree.num_atoms()).map(|a| self.tree.weight(self.tree.atom_node(a)))
    }
}

/// `p log(p/q) − p + q` with `0 log 0 = 0`; `None` outside the domain.
pub(crate) fn kl_term(p: f64, q: f64) -> Option<f64> {
    if p < 0.0 || q < 0.0 || !p.is_finite() || !q.is_finite() {
        return None;
    }
    if p == 0.0 {
        return Some(q);
    }
    if q == 0.0 {
        return None;
    }
    Some(p * (p / q).ln() - p + q)
}

/// `p log(p/q)` with `0 log 0 = 0`.
pub(crate) fn plogpq(p: f64, q: f64) -> Option<f64> {
    if p < 0.0 || q < 0.0 {
        return None;
    }
    if p == 0.0 {
        return Some(0.0);
    }
    if q == 0.0 {
        return None;
    }
    Some(p * (p / q).ln())
}

fn domain_error(a: usize, tree: &WeightedTree) -> Error {
    let idx = tree.atom_index(a);
    Error::param(format!("atom ({}, {}) leaves the divergence domain", tree.id(idx.node), idx.slot + 1))
}

/// Bregman divergence `D(x‖x')`.
pub fn divergence(x: &AtomVector, x_ref: &AtomVector, params: &DivergenceParams<'_>) -> Result<f64> {
    let tree = params.tree;
    check_len(tree.num_atoms(), x.len())?;
    check_len(tree.num_atoms(), x_ref.len())?;
    let s = params.shift;
    let mut total = 0.0;
    for (a, w) in params.atom_weights().enumerate() {
        let term = kl_term(x[a] + s, x_ref[a] + s).ok_or_else(|| domain_error(a, tree))?;
        total += w * term;
    }
    Ok(total)
}

/// `Σ_u w_u Σ_j x̃ log(x̃/x̃')`, the divergence without its linear terms.
/// With `x = x^t`, `x' = x^{t-1}` this is the shadow cost of a step.
pub fn shadow_divergence(x: &AtomVector, x_ref: &AtomVector, params: &DivergenceParams<'_>) -> Result<f64> {
    let tree = params.tree;
    check_len(tree.num_atoms(), x.len())?;
    check_len(tree.num_atoms(), x_ref.len())?;
    let s = params.shift;
    let mut total = 0.0;
    for (a, w) in params.atom_weights().enumerate() {
        total += w * plogpq(x[a] + s, x_ref[a] + s).ok_or_else(|| domain_error(a, tree))?;
    }
    Ok(total)
}

/// Potential `Φ(y‖x) = Σ_u w_u Σ_j ỹ log(ỹ/x̃)` of a Boolean comparator `y`.
pub fn potential(y: &AtomVector, x: &AtomVector, params: &DivergenceParams<'_>) -> Result<f64> {
    if let Some(a) = (0..y.len()).find(|&a| y[a] != 0.0 && y[a] != 1.0) {
        return Err(Error::param(format!("comparator is not Boolean at atom {a} (value {})", y[a])));
    }
    shadow_divergence(y, x, params)
}

/// Range `[−δ log(1+1/δ), (1+δ) log(1+1/δ)]` of one unweighted potential term
/// when `x ∈ [0,1]`.
pub fn potential_term_range(shift: f64) -> (f64, f64) {
    let l = (1.0 + 1.0 / shift).ln();
    (-shift * l, (1.0 + shift) * l)
}

/// Largest amount by which an unweighted potential term leaves its range.
pub fn potential_range_excess(y: &AtomVector, x: &AtomVector, shift: f64) -> f64 {
    let (lo, hi) = potential_term_range(shift);
    (0..y.len())
        .map(|a| {
            let t = plogpq(y[a] + shift, x[a] + shift).unwrap_or(f64::INFINITY);
            (lo - t).max(t - hi).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// `W(x) = Σ_u w_u Σ_j x_{u,j}`.
pub use crate::tree::weighted_mass;
