//! Slow reference projector for tiny trees.
//!
//! Every atom is free, every subset of every child-atom set is listed
//! explicitly, and the dual is maximised by plain cyclic coordinate ascent
//! with bisection line searches. Shares no code with the production solver
//! beyond the tree type.

use crate::error::{check_len, Error, Result};
use crate::tree::{AtomVector, WeightedTree};

/// Largest atom count accepted by [`reference_project`].
pub const REFERENCE_ATOM_LIMIT: usize = 16;

struct Halfspace {
    coef: Vec<(usize, f64)>,
    rhs: f64,
    mu: f64,
}

fn residual(h: &Halfspace, xt: &[f64], w: &[f64], shift: f64, theta: f64) -> f64 {
    let mut g = -h.rhs;
    for &(i, c) in &h.coef {
        let e = (-theta * c / w[i]).clamp(-700.0, 700.0);
        g += c * (xt[i] * e.exp() - shift);
    }
    g
}

fn bisect(h: &Halfspace, xt: &[f64], w: &[f64], shift: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(h, xt, w, shift, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Projection of `x_prev` onto `P ∩ {x_{r,1} ≤ δ}` for request leaf
/// position `request`, under the entropy shifted by `shift`.
#[allow(clippy::too_many_arguments)]
pub fn reference_project(
    x_prev: &AtomVector,
    tree: &WeightedTree,
    h: usize,
    delta: f64,
    request: usize,
    shift: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<AtomVector> {
    let n = tree.num_atoms();
    check_len(n, x_prev.len())?;
    if n > REFERENCE_ATOM_LIMIT {
        return Err(Error::SizeLimit(format!("{n} atoms exceed the reference limit {REFERENCE_ATOM_LIMIT}")));
    }
    if request >= tree.num_leaves() {
        return Err(Error::param(format!("request {request} is not a leaf position")));
    }

    let w: Vec<f64> = (0..n).map(|a| tree.weight(tree.atom_node(a))).collect();
    let mut rows: Vec<Halfspace> = Vec::new();
    let root = tree.root();
    for (slot, a) in tree.atoms_of(root).enumerate() {
        let bound = if slot >= h { 1.0 } else { 0.0 };
        rows.push(Halfspace { coef: vec![(a, -1.0)], rhs: -bound, mu: 0.0 });
    }
    for u in 0..tree.num_nodes() {
        let kids = tree.child_atoms(u);
        if kids.is_empty() {
            continue;
        }
        let own: Vec<usize> = tree.atoms_of(u).collect();
        for mask in 1u64..(1u64 << kids.len()) {
            let members: Vec<usize> = (0..kids.len()).filter(|&i| mask >> i & 1 == 1).map(|i| kids[i]).collect();
            let mut coef: Vec<(usize, f64)> = own[..members.len()].iter().map(|&a| (a, 1.0)).collect();
            coef.extend(members.iter().map(|&a| (a, -1.0)));
            rows.push(Halfspace { coef, rhs: 0.0, mu: 0.0 });
        }
    }
    for a in 0..n {
        rows.push(Halfspace { coef: vec![(a, -1.0)], rhs: 0.0, mu: 0.0 });
        rows.push(Halfspace { coef: vec![(a, 1.0)], rhs: 1.0, mu: 0.0 });
    }
    rows.push(Halfspace { coef: vec![(tree.leaf_atom(request), 1.0)], rhs: delta, mu: 0.0 });

    let mut xt: Vec<f64> = x_prev.0.iter().map(|v| v + shift).collect();
    if xt.iter().any(|&v| v <= 0.0) {
        return Err(Error::param("starting point leaves the divergence domain"));
    }
    for _ in 0..max_sweeps {
        for row in rows.iter_mut() {
            let g0 = residual(row, &xt, &w, shift, 0.0);
            let theta = if g0 > 0.0 {
                let mut hi = 1e-6;
                while residual(row, &xt, &w, shift, hi) > 0.0 && hi < 1e12 {
                    hi *= 2.0;
                }
                bisect(row, &xt, &w, shift, 0.0, hi)
            } else if g0 < 0.0 && row.mu > 0.0 {
                if residual(row, &xt, &w, shift, -row.mu) <= 0.0 {
                    -row.mu
                } else {
                    bisect(row, &xt, &w, shift, -row.mu, 0.0)
                }
            } else {
                0.0
            };
            if theta != 0.0 {
                row.mu = (row.mu + theta).max(0.0);
                for &(i, c) in &row.coef {
                    xt[i] *= (-theta * c / w[i]).clamp(-700.0, 700.0).exp();
                }
            }
        }
        let worst = rows
            .iter()
            .map(|r| {
                let g = residual(r, &xt, &w, shift, 0.0);
                if r.mu > 0.0 {
                    g.abs()
                } else {
                    g.max(0.0)
                }
            })
            .fold(0.0, f64::max);
        if worst <= tol {
            return Ok(AtomVector(xt.iter().map(|v| v - shift).collect()));
        }
    }
    Err(Error::NonConvergence { iterations: max_sweeps, residual: f64::NAN })
}
