//! Membership, separation and tight sets for the anti-server polytope.
//!
//! `P` holds atom vectors in `[0,1]^N` with root slots `x_{r,j} ≥ 1_{(j>h)}`
//! and, for every node `u` and every nonempty `S ⊆ χ_u`,
//! `Σ_{j≤|S|} x_{u,j} ≤ x(S)`. For a fixed size the right side is smallest
//! on the `|S|` smallest child atoms, so one sort per node decides all
//! `2^{|χ_u|}` subset constraints.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::tree::{AtomVector, WeightedTree};

/// Absolute tolerance for violation and tightness classification.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest child-atom count for which subsets are enumerated exhaustively.
pub const EXHAUSTIVE_FANOUT_LIMIT: usize = 12;

/// `δ = (k − h + ½) / (k + ½)`.
pub fn delta_for(k: usize, h: usize) -> f64 {
    (k as f64 - h as f64 + 0.5) / (k as f64 + 0.5)
}

#[derive(Debug, Clone, Copy)]
pub struct PolytopeSpec<'a> {
    pub tree: &'a WeightedTree,
    pub h: usize,
    pub delta: f64,
    /// Requested leaf position; adds the cap `x_{r,1} ≤ δ`.
    pub request: Option<usize>,
    /// Adds the leaf floor `x_{ℓ,1} ≥ δ` of the shifted polytope.
    pub leaf_floor: bool,
}

impl<'a> PolytopeSpec<'a> {
    /// Plain `P` for `h` servers with an explicit `δ`.
    pub fn new(tree: &'a WeightedTree, h: usize, delta: f64) -> Result<Self> {
        if h > tree.num_leaves() {
            return Err(Error::param(format!("h = {h} exceeds the {} leaves", tree.num_leaves())));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param(format!("δ = {delta} must lie in (0,1)")));
        }
        Ok(PolytopeSpec { tree, h, delta, request: None, leaf_floor: false })
    }

    /// `P` with `δ` derived from `(k, h)`; requires `1 ≤ h ≤ k ≤ n`.
    pub fn for_servers(tree: &'a WeightedTree, k: usize, h: usize) -> Result<Self> {
        if !(1 <= h && h <= k && k <= tree.num_leaves()) {
            return Err(Error::param(format!("need 1 ≤ h ≤ k ≤ n, got h={h}, k={k}, n={}", tree.num_leaves())));
        }
        Self::new(tree, h, delta_for(k, h))
    }

    pub fn with_request(mut self, leaf: usize) -> Self {
        self.request = Some(leaf);
        self
    }

    pub fn shifted(mut self) -> Self {
        self.leaf_floor = true;
        self
    }

    /// Root slot lower bound `1_{(j > h)}` for zero-based `slot`.
    pub fn root_bound(&self, slot: usize) -> f64 {
        if slot + 1 > self.h {
            1.0
        } else {
            0.0
        }
    }
}

/// `Σ_{j≤|S|} x_{parent,j} ≤ Σ_{a∈S} x_a` for a set `S` of child atoms of
/// `parent` (flat atom indices, sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetConstraint {
    pub parent: usize,
    pub members: Vec<usize>,
}

impl SubsetConstraint {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// `x(S) − Σ_{j≤|S|} x_{p,j}`; nonnegative when satisfied, zero when tight.
    pub fn slack(&self, x: &AtomVector, tree: &WeightedTree) -> f64 {
        let lhs: f64 = tree.atoms_of(self.parent).take(self.members.len()).map(|a| x[a]).sum();
        let rhs: f64 = self.members.iter().map(|&a| x[a]).sum();
        rhs - lhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    Box,
    RootBound,
    LeafFloor,
    RequestCap,
    Subset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: ConstraintFamily,
    pub checked: usize,
    pub violated: usize,
    /// Smallest slack seen (negative means violated).
    pub worst_slack: f64,
    pub worst_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub tol: f64,
    pub families: Vec<FamilyReport>,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.families.iter().all(|f| f.violated == 0)
    }

    pub fn family(&self, family: ConstraintFamily) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.family == family)
    }
}

struct Tracker {
    report: FamilyReport,
    tol: f64,
}

impl Tracker {
    fn new(family: ConstraintFamily, tol: f64) -> Self {
        Tracker {
            report: FamilyReport { family, checked: 0, violated: 0, worst_slack: f64::INFINITY, worst_at: None },
            tol,
        }
    }

    fn see(&mut self, slack: f64, at: impl FnOnce() -> String) {
        self.report.checked += 1;
        if slack < -self.tol {
            self.report.violated += 1;
        }
        if slack < self.report.worst_slack {
            self.report.worst_slack = slack;
            self.report.worst_at = Some(at());
        }
    }
}

/// Child atoms of `u` sorted by value, ties by atom index.
pub fn sorted_child_atoms(x: &AtomVector, tree: &WeightedTree, u: usize) -> Vec<usize> {
    let mut atoms = tree.child_atoms(u);
    atoms.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    atoms
}

/// Slack of the canonical size-`s` constraint for every `s = 1..=|χ_u|`,
/// given the sorted child atoms.
fn canonical_slacks(x: &AtomVector, tree: &WeightedTree, u: usize, sorted: &[usize]) -> Vec<f64> {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    tree.atoms_of(u)
        .zip(sorted)
        .map(|(p, &c)| {
            lhs += x[p];
            rhs += x[c];
            rhs - lhs
        })
        .collect()
}

pub fn check_membership(x: &AtomVector, spec: &PolytopeSpec<'_>, tol: f64) -> Result<MembershipReport> {
    let tree = spec.tree;
    check_len(tree.num_atoms(), x.len())?;

    let mut boxes = Tracker::new(ConstraintFamily::Box, tol);
    for a in 0..x.len() {
        let v = x[a];
        boxes.see(v.min(1.0 - v), || format!("atom {}", describe_atom(tree, a)));
    }

    let mut root = Tracker::new(ConstraintFamily::RootBound, tol);
    for (slot, a) in tree.atoms_of(tree.root()).enumerate() {
        root.see(x[a] - spec.root_bound(slot), || format!("root slot {}", slot + 1));
    }

    let mut families = vec![boxes.report, root.report];

    if spec.leaf_floor {
        let mut floor = Tracker::new(ConstraintFamily::LeafFloor, tol);
        for p in 0..tree.num_leaves() {
            floor.see(x[tree.leaf_atom(p)] - spec.delta, || format!("leaf {}", tree.id(tree.leaf_node(p))));
        }
        families.push(floor.report);
    }

    if let Some(r) = spec.request {
        let mut cap = Tracker::new(ConstraintFamily::RequestCap, tol);
        cap.see(spec.delta - x[tree.leaf_atom(r)], || format!("leaf {}", tree.id(tree.leaf_node(r))));
        families.push(cap.report);
    }

    let mut subsets = Tracker::new(ConstraintFamily::Subset, tol);
    for u in 0..tree.num_nodes() {
        if tree.is_leaf(u) {
            continue;
        }
        let sorted = sorted_child_atoms(x, tree, u);
        for (s, slack) in canonical_slacks(x, tree, u, &sorted).into_iter().enumerate() {
            subsets.see(slack, || format!("node {} size {}", tree.id(u), s + 1));
        }
    }
    families.push(subsets.report);

    Ok(MembershipReport { tol, families })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Box { atom: usize, upper: bool, amount: f64 },
    RootBound { slot: usize, amount: f64 },
    LeafFloor { leaf: usize, amount: f64 },
    RequestCap { amount: f64 },
    Subset { constraint: SubsetConstraint, amount: f64 },
}

impl Violation {
    pub fn amount(&self) -> f64 {
        match self {
            Violation::Box { amount, .. }
            | Violation::RootBound { amount, .. }
            | Violation::LeafFloor { amount, .. }
            | Violation::RequestCap { amount }
            | Violation::Subset { amount, .. } => *amount,
        }
    }
}

/// A most violated constraint, or `None` for a member point.
///
/// Families are scanned in the order box, root bound, leaf floor, request
/// cap, subset; the first family with a violation wins, and within it the
/// largest violation (ties: smallest node index, then smallest size).
pub fn separate(x: &AtomVector, spec: &PolytopeSpec<'_>, tol: f64) -> Result<Option<Violation>> {
    let tree = spec.tree;
    check_len(tree.num_atoms(), x.len())?;

    let mut best: Option<Violation> = None;
    let consider = |best: &mut Option<Violation>, v: Violation| {
        if v.amount() > tol && best.as_ref().is_none_or(|b| v.amount() > b.amount()) {
            *best = Some(v);
        }
    };
    for a in 0..x.len() {
        consider(&mut best, Violation::Box { atom: a, upper: false, amount: -x[a] });
        consider(&mut best, Violation::Box { atom: a, upper: true, amount: x[a] - 1.0 });
    }
    if best.is_some() {
        return Ok(best);
    }
    for (slot, a) in tree.atoms_of(tree.root()).enumerate() {
        consider(&mut best, Violation::RootBound { slot, amount: spec.root_bound(slot) - x[a] });
    }
    if best.is_some() {
        return Ok(best);
    }
    if spec.leaf_floor {
        for p in 0..tree.num_leaves() {
            consider(&mut best, Violation::LeafFloor { leaf: p, amount: spec.delta - x[tree.leaf_atom(p)] });
        }
        if best.is_some() {
            return Ok(best);
        }
    }
    if let Some(r) = spec.request {
        consider(&mut best, Violation::RequestCap { amount: x[tree.leaf_atom(r)] - spec.delta });
        if best.is_some() {
            return Ok(best);
        }
    }
    for u in 0..tree.num_nodes() {
        if tree.is_leaf(u) {
            continue;
        }
        let sorted = sorted_child_atoms(x, tree, u);
        for (s, slack) in canonical_slacks(x, tree, u, &sorted).into_iter().enumerate() {
            if -slack > tol && best.as_ref().is_none_or(|b| -slack > b.amount()) {
                let mut members = sorted[..=s].to_vec();
                members.sort_unstable();
                best = Some(Violation::Subset { constraint: SubsetConstraint { parent: u, members }, amount: -slack });
            }
        }
    }
    Ok(best)
}

/// Every canonical subset constraint violated by more than `tol`, one per
/// `(node, size)` pair.
pub fn violated_subsets(x: &AtomVector, tree: &WeightedTree, tol: f64) -> Vec<(SubsetConstraint, f64)> {
    let mut out = Vec::new();
    for u in 0..tree.num_nodes() {
        if tree.is_leaf(u) {
            continue;
        }
        let sorted = sorted_child_atoms(x, tree, u);
        for (s, slack) in canonical_slacks(x, tree, u, &sorted).into_iter().enumerate() {
            if slack < -tol {
                let mut members = sorted[..=s].to_vec();
                members.sort_unstable();
                out.push((SubsetConstraint { parent: u, members }, -slack));
            }
        }
    }
    out
}

/// Tight canonical constraints at `u`, one candidate per size.
pub fn tight_sets(x: &AtomVector, tree: &WeightedTree, u: usize, tol: f64) -> Result<Vec<SubsetConstraint>> {
    check_len(tree.num_atoms(), x.len())?;
    if tree.is_leaf(u) {
        return Ok(Vec::new());
    }
    let sorted = sorted_child_atoms(x, tree, u);
    let mut out = Vec::new();
    for (s, slack) in canonical_slacks(x, tree, u, &sorted).into_iter().enumerate() {
        if slack < -tol {
            return Err(Error::Infeasible(format!("node {} violates its size-{} constraint by {:e}", tree.id(u), s + 1, -slack)));
        }
        if slack <= tol {
            let mut members = sorted[..=s].to_vec();
            members.sort_unstable();
            out.push(SubsetConstraint { parent: u, members });
        }
    }
    Ok(out)
}

/// All tight subsets of `χ_u` by enumeration; `|χ_u| ≤ EXHAUSTIVE_FANOUT_LIMIT`.
pub fn tight_sets_exhaustive(x: &AtomVector, tree: &WeightedTree, u: usize, tol: f64) -> Result<Vec<SubsetConstraint>> {
    check_len(tree.num_atoms(), x.len())?;
    let child = tree.child_atoms(u);
    if child.len() > EXHAUSTIVE_FANOUT_LIMIT {
        return Err(Error::SizeLimit(format!("{} child atoms exceed {}", child.len(), EXHAUSTIVE_FANOUT_LIMIT)));
    }
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << child.len()) {
        let members: Vec<usize> = (0..child.len()).filter(|i| mask >> i & 1 == 1).map(|i| child[i]).collect();
        let c = SubsetConstraint { parent: u, members };
        let slack = c.slack(x, tree);
        if slack < -tol {
            return Err(Error::Infeasible(format!("subset {:?} of node {} violated by {:e}", c.members, tree.id(u), -slack)));
        }
        if slack <= tol {
            out.push(c);
        }
    }
    Ok(out)
}

fn describe_atom(tree: &WeightedTree, a: usize) -> String {
    let idx = tree.atom_index(a);
    format!("({}, {})", tree.id(idx.node), idx.slot + 1)
}
