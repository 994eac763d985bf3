use serde::{Deserialize, Serialize};

use crate::polytope::{PolytopeSpec, SubsetConstraint};
use crate::tree::{AtomVector, WeightedTree};

/// Nonnegative multipliers of the projection onto `P_t`.
///
/// `subsets` holds `λ_S` for the subset constraints with positive weight,
/// `root[j]` the multiplier of the root bound on slot `j`, `gamma` the
/// multiplier of the request cap. Box multipliers are only nonzero when the
/// box binds, which does not happen for starting points in `P_δ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub subsets: Vec<(SubsetConstraint, f64)>,
    pub root: Vec<f64>,
    pub gamma: f64,
    pub box_lower: Vec<(usize, f64)>,
    pub box_upper: Vec<(usize, f64)>,
}

/// Per-atom aggregates `a`, `b` and their scaled forms `A = x̃a`, `B = x̃b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktTerms {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub big_a: Vec<f64>,
    pub big_b: Vec<f64>,
}

impl DualCertificate {
    pub fn zero(tree: &WeightedTree) -> Self {
        DualCertificate { root: vec![0.0; tree.atoms_of(tree.root()).len()], ..Default::default() }
    }

    /// Sets `λ_{r,j}` so that the root rows of stationarity hold with the
    /// root fixed: `λ_{r,j} = Σ_{T ⊆ χ_r, |T| ≥ j} λ_T`.
    pub(crate) fn fill_root(&mut self, tree: &WeightedTree) {
        let root = tree.root();
        let mut lam = vec![0.0; tree.atoms_of(root).len()];
        for (c, l) in &self.subsets {
            if c.parent == root {
                for v in lam.iter_mut().take(c.size()) {
                    *v += l;
                }
            }
        }
        self.root = lam;
    }

    pub fn kkt_terms(&self, x: &AtomVector, tree: &WeightedTree, shift: f64) -> KktTerms {
        let n = tree.num_atoms();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for (c, l) in &self.subsets {
            for &m in &c.members {
                a[m] += l;
            }
            for p in tree.atoms_of(c.parent).take(c.size()) {
                b[p] += l;
            }
        }
        for (slot, p) in tree.atoms_of(tree.root()).enumerate() {
            a[p] = self.root.get(slot).copied().unwrap_or(0.0);
        }
        let big_a = (0..n).map(|i| (x[i] + shift) * a[i]).collect();
        let big_b = (0..n).map(|i| (x[i] + shift) * b[i]).collect();
        KktTerms { a, b, big_a, big_b }
    }

    /// Largest absolute error in `w_u log(x̃ᵗ/x̃ᵗ⁻¹) = a − b − γ·1_{cap} + box terms`.
    pub fn stationarity_residual(
        &self,
        x_prev: &AtomVector,
        x_new: &AtomVector,
        tree: &WeightedTree,
        shift: f64,
        cap_atom: usize,
    ) -> f64 {
        let terms = self.kkt_terms(x_new, tree, shift);
        let mut rhs: Vec<f64> = (0..tree.num_atoms()).map(|i| terms.a[i] - terms.b[i]).collect();
        rhs[cap_atom] -= self.gamma;
        for &(i, l) in &self.box_lower {
            rhs[i] += l;
        }
        for &(i, l) in &self.box_upper {
            rhs[i] -= l;
        }
        let mut worst: f64 = 0.0;
        for (i, r) in rhs.iter().enumerate() {
            let (p, q) = (x_new[i] + shift, x_prev[i] + shift);
            let lhs = if p == q {
                0.0
            } else if p > 0.0 && q > 0.0 {
                tree.weight(tree.atom_node(i)) * (p / q).ln()
            } else {
                return f64::INFINITY;
            };
            worst = worst.max((lhs - r).abs());
        }
        worst
    }

    /// Largest slack of a constraint carrying a positive multiplier, and the
    /// largest negative multiplier if any.
    pub fn complementarity_residual(
        &self,
        x: &AtomVector,
        tree: &WeightedTree,
        spec: &PolytopeSpec<'_>,
        cap_atom: usize,
    ) -> f64 {
        let mut worst: f64 = 0.0;
        let mut see = |lam: f64, slack: f64| {
            worst = worst.max(-lam);
            if lam > 0.0 {
                worst = worst.max(slack.abs());
            }
        };
        for (c, l) in &self.subsets {
            see(*l, c.slack(x, tree));
        }
        for (slot, p) in tree.atoms_of(tree.root()).enumerate() {
            see(self.root.get(slot).copied().unwrap_or(0.0), x[p] - spec.root_bound(slot));
        }
        see(self.gamma, spec.delta - x[cap_atom]);
        for &(i, l) in &self.box_lower {
            see(l, x[i]);
        }
        for &(i, l) in &self.box_upper {
            see(l, 1.0 - x[i]);
        }
        worst
    }
}
