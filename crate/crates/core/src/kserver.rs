//! Fractional (h,k)-server on a weighted tree.
//!
//! The state is an anti-server vector `x ∈ P_δ`; serving a request projects
//! onto `P_t` under the shifted entropy. Movement is the tree norm of the
//! change, the server view is `z = (1 − x_leaf)/(1 − δ)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bregman::{
    divergence, potential, project, shadow_divergence, DivergenceParams, DualCertificate, ProjectionDiagnostics,
    ProjectionOptions, ProjectionResult,
};
use crate::error::{Error, Result};
use crate::polytope::{check_membership, delta_for, tight_sets_exhaustive, PolytopeSpec, EXHAUSTIVE_FANOUT_LIMIT};
use crate::tree::{
    encode_integer, server_distance, to_server_vector, tree_norm, tree_norm_positive, weighted_mass, AtomVector,
    WeightedTree,
};

/// Tolerance of the structural step checks.
pub const STRUCTURAL_TOL: f64 = 1e-8;
/// Tolerance of the potential and divergence inequalities.
pub const POTENTIAL_TOL: f64 = 1e-7;
/// Tolerance of the certificate-based identities.
pub const CERTIFICATE_TOL: f64 = 1e-6;

/// Starting point: `δ` on server leaves, `(n−h−kδ)/(n−k)` on the others,
/// internal slots the sorted values of their child atoms, root `1_{(j>h)}`.
pub fn initial_point(tree: &WeightedTree, k: usize, h: usize, servers: &[usize]) -> Result<AtomVector> {
    let n = tree.num_leaves();
    if h == 0 || h > k {
        return Err(Error::param(format!("need 1 ≤ h ≤ k, got h={h}, k={k}")));
    }
    if k >= n {
        return Err(Error::param(format!("k = {k} must be smaller than the number of leaves {n}")));
    }
    if servers.len() != k {
        return Err(Error::param(format!("expected {k} initial servers, got {}", servers.len())));
    }
    let distinct: BTreeSet<usize> = servers.iter().copied().collect();
    if distinct.len() != servers.len() {
        return Err(Error::param("duplicate initial server leaves"));
    }
    if let Some(&p) = distinct.iter().find(|&&p| p >= n) {
        return Err(Error::param(format!("initial server leaf position {p} out of range")));
    }

    let delta = delta_for(k, h);
    let rest = (n as f64 - h as f64 - k as f64 * delta) / (n - k) as f64;
    let mut x = AtomVector::zeros(tree.num_atoms());
    for p in 0..n {
        x[tree.leaf_atom(p)] = if distinct.contains(&p) { delta } else { rest };
    }
    for d in (0..tree.height()).rev() {
        for &u in tree.level(d) {
            let mut vals: Vec<f64> = tree.child_atoms(u).iter().map(|&a| x[a]).collect();
            vals.sort_by(f64::total_cmp);
            for (a, v) in tree.atoms_of(u).zip(vals) {
                x[a] = v;
            }
        }
    }
    let spec = PolytopeSpec::new(tree, h, delta)?;
    for (slot, a) in tree.atoms_of(tree.root()).enumerate() {
        x[a] = spec.root_bound(slot);
    }
    let report = check_membership(&x, &spec.shifted(), 1e-9)?;
    if !report.is_member() {
        return Err(Error::Infeasible(format!("initial point fails membership: {:?}", report.families)));
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MovementTotals {
    pub positive: f64,
    pub full: f64,
    pub server: f64,
}

#[derive(Debug, Clone)]
pub struct KServerState {
    pub tree: WeightedTree,
    pub k: usize,
    pub h: usize,
    pub delta: f64,
    pub x: AtomVector,
    pub last_request: Option<usize>,
    pub step: usize,
    pub totals: MovementTotals,
    pub options: ProjectionOptions,
}

impl KServerState {
    pub fn new(tree: WeightedTree, k: usize, h: usize, servers: &[usize]) -> Result<Self> {
        let x = initial_point(&tree, k, h, servers)?;
        Ok(KServerState {
            delta: delta_for(k, h),
            tree,
            k,
            h,
            x,
            last_request: None,
            step: 0,
            totals: MovementTotals::default(),
            options: ProjectionOptions::default(),
        })
    }

    pub fn spec(&self) -> PolytopeSpec<'_> {
        PolytopeSpec { tree: &self.tree, h: self.h, delta: self.delta, request: None, leaf_floor: false }
    }

    pub fn params(&self) -> DivergenceParams<'_> {
        DivergenceParams { tree: &self.tree, shift: self.delta }
    }

    /// Server mass per leaf.
    pub fn servers(&self) -> Vec<f64> {
        to_server_vector(&self.x, self.delta, &self.tree).map(|z| z.0).unwrap_or_default()
    }

    /// Serves a request at leaf position `request`.
    pub fn serve(&mut self, request: usize) -> Result<Step> {
        if request >= self.tree.num_leaves() {
            return Err(Error::param(format!("request {request} is not a leaf position")));
        }
        let spec = self.spec().with_request(request);
        let result = project(&self.x, &spec, &self.params(), &self.options)?;
        if !result.converged {
            return Err(Error::NonConvergence {
                iterations: result.diagnostics.sweeps,
                residual: result.diagnostics.feasibility_residual,
            });
        }
        let diff = result.x.sub(&self.x)?;
        let full = tree_norm(&diff, &self.tree)?;
        let positive = tree_norm_positive(&diff, &self.tree)?;
        let server = server_distance(
            &to_server_vector(&result.x, self.delta, &self.tree)?,
            &to_server_vector(&self.x, self.delta, &self.tree)?,
            &self.tree,
        )?;
        self.step += 1;
        self.totals.full += full;
        self.totals.positive += positive;
        self.totals.server += server;
        self.last_request = Some(request);
        let record = StepRecord {
            step: self.step,
            request,
            request_id: self.tree.id(self.tree.leaf_node(request)).to_string(),
            movement: full,
            positive_movement: positive,
            server_movement: server,
            potential_before: None,
            potential_after: None,
            audit: None,
            solver: result.diagnostics.clone(),
        };
        let x_prev = std::mem::replace(&mut self.x, result.x.clone());
        Ok(Step { record, x_prev, projection: result })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub request: usize,
    pub request_id: String,
    pub movement: f64,
    pub positive_movement: f64,
    pub server_movement: f64,
    pub potential_before: Option<f64>,
    pub potential_after: Option<f64>,
    pub audit: Option<AuditReport>,
    pub solver: ProjectionDiagnostics,
}

#[derive(Debug, Clone)]
pub struct Step {
    pub record: StepRecord,
    pub x_prev: AtomVector,
    pub projection: ProjectionResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub status: CheckStatus,
    /// Amount by which the inequality is violated (negative or zero when it
    /// holds); absolute error for identities.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    fn push(&mut self, name: &str, residual: f64, tol: f64) {
        let status = if residual <= tol { CheckStatus::Pass } else { CheckStatus::Fail };
        self.checks.push(AuditCheck { name: name.into(), status, residual });
    }

    fn skip(&mut self, name: &str) {
        self.checks.push(AuditCheck { name: name.into(), status: CheckStatus::Skipped, residual: 0.0 });
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn all_passed(&self) -> bool {
        self.count(CheckStatus::Fail) == 0
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
    }
}

/// Invariants every served state must satisfy: root tightness, box with the
/// request at `δ` and leaves at least `δ`, monotone slots, level mass `n−h`,
/// and the flow direction of leaf changes.
pub fn structural_checks(
    tree: &WeightedTree,
    h: usize,
    delta: f64,
    request: usize,
    x_prev: &AtomVector,
    x_new: &AtomVector,
) -> AuditReport {
    let mut report = AuditReport::default();
    let n = tree.num_leaves();

    let root_err = tree
        .atoms_of(tree.root())
        .enumerate()
        .map(|(slot, a)| (x_new[a] - if slot >= h { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    report.push("root_tight", root_err, STRUCTURAL_TOL);

    let mut box_err: f64 = 0.0;
    for a in 0..x_new.len() {
        box_err = box_err.max(-x_new[a]).max(x_new[a] - 1.0);
    }
    for p in 0..n {
        box_err = box_err.max(delta - x_new[tree.leaf_atom(p)]);
    }
    box_err = box_err.max((x_new[tree.leaf_atom(request)] - delta).abs());
    report.push("box", box_err, STRUCTURAL_TOL);

    let mut mono: f64 = 0.0;
    for u in 0..tree.num_nodes() {
        let atoms: Vec<usize> = tree.atoms_of(u).collect();
        for w in atoms.windows(2) {
            mono = mono.max(x_new[w[0]] - x_new[w[1]]);
        }
    }
    report.push("slot_monotone", mono, STRUCTURAL_TOL);

    let mut mass: f64 = 0.0;
    for d in 0..=tree.height() {
        let s: f64 = tree.level(d).iter().flat_map(|&u| tree.atoms_of(u)).map(|a| x_new[a]).sum();
        mass = mass.max((s - (n - h) as f64).abs());
    }
    report.push("level_mass", mass, STRUCTURAL_TOL);

    let mut flow: f64 = 0.0;
    for p in 0..n {
        let a = tree.leaf_atom(p);
        let change = x_new[a] - x_prev[a];
        flow = flow.max(if p == request { change } else { -change });
    }
    report.push("leaf_flow", flow, STRUCTURAL_TOL);
    report
}

/// Comparator-dependent and certificate-dependent checks for one step.
///
/// `y_prev`, `y_new` are Boolean encodings of the comparator before and
/// after its own move for this request; the comparator moves first.
#[allow(clippy::too_many_arguments)]
pub fn audit_step(
    tree: &WeightedTree,
    h: usize,
    delta: f64,
    request: usize,
    x_prev: &AtomVector,
    result: &ProjectionResult,
    y_prev: &AtomVector,
    y_new: &AtomVector,
) -> Result<AuditReport> {
    let params = DivergenceParams::new(tree, delta)?;
    let x_new = &result.x;
    let mut report = structural_checks(tree, h, delta, request, x_prev, x_new);

    let l = (1.0 + 1.0 / delta).ln();
    let y_move = tree_norm_positive(&y_new.sub(y_prev)?, tree)?;
    let opt_change = potential(y_new, x_prev, &params)? - potential(y_prev, x_prev, &params)?;
    report.push("opt_charge", opt_change - (1.0 + delta) * l * y_move, POTENTIAL_TOL);

    let shadow = shadow_divergence(x_new, x_prev, &params)?;
    let alg_change = potential(y_new, x_new, &params)? - potential(y_new, x_prev, &params)?;
    report.push("shadow_potential", shadow + alg_change, POTENTIAL_TOL);

    let Some(cert) = &result.certificate else {
        for name in ["movement_vs_a", "level_identity", "charge_up", "second_bound"] {
            report.skip(name);
        }
        return Ok(report);
    };
    certificate_checks(tree, delta, request, x_prev, x_new, cert, y_new, &params, &mut report)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn certificate_checks(
    tree: &WeightedTree,
    delta: f64,
    request: usize,
    x_prev: &AtomVector,
    x_new: &AtomVector,
    cert: &DualCertificate,
    y_new: &AtomVector,
    params: &DivergenceParams<'_>,
    report: &mut AuditReport,
) -> Result<()> {
    let terms = cert.kkt_terms(x_new, tree, delta);
    let diff = x_new.sub(x_prev)?;
    let total_a: f64 = terms.big_a.iter().sum();
    report.push("movement_vs_a", tree_norm_positive(&diff, tree)? - total_a, CERTIFICATE_TOL);

    let mut level: f64 = 0.0;
    let mut charge: f64 = 0.0;
    for u in 0..tree.num_nodes() {
        if tree.is_leaf(u) {
            continue;
        }
        let child_a: f64 = tree.child_atoms(u).iter().map(|&a| terms.big_a[a]).sum();
        let own_b: f64 = tree.atoms_of(u).map(|a| terms.big_b[a]).sum();
        level = level.max((own_b - child_a).abs());
        if u != tree.root() {
            let own_a: f64 = tree.atoms_of(u).map(|a| terms.big_a[a]).sum();
            let moved: f64 = tree.atoms_of(u).map(|a| diff[a]).sum();
            charge = charge.max(child_a - (own_a - tree.weight(u) * moved));
        }
    }
    report.push("level_identity", level, CERTIFICATE_TOL);
    report.push("charge_up", charge, CERTIFICATE_TOL);

    if y_new[tree.leaf_atom(request)] == 0.0 {
        let gain = divergence(y_new, x_prev, params)? - divergence(y_new, x_new, params)?;
        report.push("second_bound", delta * cert.gamma - gain, POTENTIAL_TOL);
    } else {
        report.skip("second_bound");
    }
    Ok(())
}

/// Closure of tight sets under union at every node whose child atoms can be
/// enumerated. Returns the largest slack found on a union of two tight sets.
pub fn uncrossing_residual(x: &AtomVector, tree: &WeightedTree, tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in 0..tree.num_nodes() {
        let kids = tree.child_atoms(u).len();
        if tree.is_leaf(u) || kids > EXHAUSTIVE_FANOUT_LIMIT {
            continue;
        }
        let tight = tight_sets_exhaustive(x, tree, u, tol)?;
        for (i, s) in tight.iter().enumerate() {
            for t in &tight[i + 1..] {
                let mut members: Vec<usize> = s.members.iter().chain(&t.members).copied().collect();
                members.sort_unstable();
                members.dedup();
                let union = crate::polytope::SubsetConstraint { parent: u, members };
                worst = worst.max(union.slack(x, tree));
            }
        }
    }
    Ok(worst)
}

/// Terms of the aggregate movement bound for one run against a comparator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateBound {
    pub depth: usize,
    pub delta: f64,
    pub alg_positive: f64,
    pub opt_positive: f64,
    pub phi_start: f64,
    pub phi_end: f64,
    pub mass_start: f64,
    pub mass_end: f64,
    /// `3(D+1)(1+δ)log(1+1/δ)·OPT⁺ + 3(D+1)(Φ₀ − Φ_T) + D(W(x⁰) − W(x^T))`.
    pub rhs: f64,
}

impl AggregateBound {
    pub fn ratio_factor(depth: usize, delta: f64) -> f64 {
        3.0 * (depth as f64 + 1.0) * (1.0 + delta) * (1.0 + 1.0 / delta).ln()
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.alg_positive
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.alg_positive <= self.rhs + tol
    }
}

/// Result of a k-server run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<StepRecord>,
    pub totals: MovementTotals,
    pub x_start: AtomVector,
    pub x_end: AtomVector,
    pub bound: Option<AggregateBound>,
}

impl Trace {
    pub fn audit_counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for r in self.steps.iter().filter_map(|s| s.audit.as_ref()) {
            c.0 += r.count(CheckStatus::Pass);
            c.1 += r.count(CheckStatus::Fail);
            c.2 += r.count(CheckStatus::Skipped);
        }
        c
    }
}

/// Runs the algorithm. With `comparator = Some(configs)` (leaf sets of an
/// h-server solution for times `0..=T`) every step is audited and the
/// aggregate bound is evaluated.
pub fn run(state: &mut KServerState, requests: &[usize], comparator: Option<&[Vec<usize>]>) -> Result<Trace> {
    if let Some(c) = comparator {
        if c.len() != requests.len() + 1 {
            return Err(Error::DimensionMismatch { expected: requests.len() + 1, got: c.len() });
        }
    }
    let encodings: Option<Vec<AtomVector>> = comparator
        .map(|c| c.iter().map(|leaves| encode_integer(leaves, state.h, &state.tree)).collect::<Result<_>>())
        .transpose()?;

    let x_start = state.x.clone();
    let mut steps = Vec::with_capacity(requests.len());
    let mut opt_positive = 0.0;
    for (t, &r) in requests.iter().enumerate() {
        let step = state.serve(r)?;
        let mut record = step.record;
        match &encodings {
            Some(ys) => {
                let (y_prev, y_new) = (&ys[t], &ys[t + 1]);
                if y_new[state.tree.leaf_atom(r)] != 0.0 {
                    return Err(Error::param(format!("comparator does not serve request {} at step {}", r, t + 1)));
                }
                opt_positive += tree_norm_positive(&y_new.sub(y_prev)?, &state.tree)?;
                let params = state.params();
                record.potential_before = Some(potential(y_new, &step.x_prev, &params)?);
                record.potential_after = Some(potential(y_new, &state.x, &params)?);
                let mut audit =
                    audit_step(&state.tree, state.h, state.delta, r, &step.x_prev, &step.projection, y_prev, y_new)?;
                let cross = uncrossing_residual(&state.x, &state.tree, 1e-9)?;
                audit.push("uncrossing", cross, 4e-9);
                record.audit = Some(audit);
            }
            None => {
                record.audit = Some(structural_checks(&state.tree, state.h, state.delta, r, &step.x_prev, &state.x));
            }
        }
        steps.push(record);
    }

    let bound = match &encodings {
        Some(ys) => {
            let params = state.params();
            let depth = state.tree.height();
            let phi_start = potential(&ys[0], &x_start, &params)?;
            let phi_end = potential(&ys[ys.len() - 1], &state.x, &params)?;
            let mass_start = weighted_mass(&x_start, &state.tree)?;
            let mass_end = weighted_mass(&state.x, &state.tree)?;
            let c = 3.0 * (depth as f64 + 1.0);
            let rhs = AggregateBound::ratio_factor(depth, state.delta) * opt_positive
                + c * (phi_start - phi_end)
                + depth as f64 * (mass_start - mass_end);
            Some(AggregateBound {
                depth,
                delta: state.delta,
                alg_positive: state.totals.positive,
                opt_positive,
                phi_start,
                phi_end,
                mass_start,
                mass_end,
                rhs,
            })
        }
        None => None,
    };

    Ok(Trace { steps, totals: state.totals, x_start, x_end: state.x.clone(), bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::NodeRecord;

    fn star(n: usize) -> WeightedTree {
        let mut recs = vec![NodeRecord { id: "r".into(), parent: None, weight: 1.0 }];
        for i in 0..n {
            recs.push(NodeRecord { id: format!("l{i}"), parent: Some("r".into()), weight: 1.0 });
        }
        WeightedTree::from_records(recs).unwrap()
    }

    fn binary4() -> WeightedTree {
        let mut recs = vec![NodeRecord { id: "r".into(), parent: None, weight: 1.0 }];
        for m in ["a", "b"] {
            recs.push(NodeRecord { id: m.into(), parent: Some("r".into()), weight: 0.5 });
            for i in 0..2 {
                recs.push(NodeRecord { id: format!("{m}{i}"), parent: Some(m.into()), weight: 0.25 });
            }
        }
        WeightedTree::from_records(recs).unwrap()
    }

    #[test]
    fn initial_point_on_star() {
        let t = star(2);
        let x = initial_point(&t, 1, 1, &[0]).unwrap();
        let third = 1.0 / 3.0;
        assert!((x[t.leaf_atom(0)] - third).abs() < 1e-15);
        assert!((x[t.leaf_atom(1)] - 2.0 * third).abs() < 1e-15);
        let root: Vec<f64> = t.atoms_of(t.root()).map(|a| x[a]).collect();
        assert_eq!(root, vec![0.0, 1.0]);
    }

    #[test]
    fn initial_point_errors() {
        let t = star(3);
        assert!(initial_point(&t, 3, 3, &[0, 1, 2]).is_err());
        assert!(initial_point(&t, 2, 2, &[0, 0]).is_err());
        assert!(initial_point(&t, 2, 2, &[0]).is_err());
        assert!(initial_point(&t, 1, 2, &[0]).is_err());
    }

    #[test]
    fn initial_point_binary_is_member() {
        let t = binary4();
        let x = initial_point(&t, 2, 2, &[0, 1]).unwrap();
        let spec = PolytopeSpec::for_servers(&t, 2, 2).unwrap().shifted();
        assert!(check_membership(&x, &spec, 1e-12).unwrap().is_member());
    }

    #[test]
    fn star_alternating_moves_two_thirds() {
        let mut s = KServerState::new(star(2), 1, 1, &[0]).unwrap();
        let first = s.serve(0).unwrap();
        assert_eq!(first.record.movement, 0.0);
        for t in 0..10 {
            let step = s.serve((t + 1) % 2).unwrap();
            assert!((step.record.movement - 2.0 / 3.0).abs() < 1e-9, "{}", step.record.movement);
            let leaves = s.servers();
            assert!((leaves.iter().sum::<f64>() - 1.5).abs() < 1e-9);
        }
        assert!((s.totals.full - 10.0 * 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn star_forced_projection() {
        let t = star(2);
        let mut s = KServerState::new(t, 1, 1, &[1]).unwrap();
        let step = s.serve(0).unwrap();
        let tr = &s.tree;
        assert!((s.x[tr.leaf_atom(0)] - 1.0 / 3.0).abs() < 1e-10);
        assert!((s.x[tr.leaf_atom(1)] - 2.0 / 3.0).abs() < 1e-10);
        assert!(step.projection.certificate.is_some());
    }

    #[test]
    fn audited_run_passes_on_binary_tree() {
        let t = binary4();
        let mut s = KServerState::new(t, 2, 2, &[0, 2]).unwrap();
        let requests = [1, 3, 0, 2, 1, 1, 3];
        let mut configs = vec![vec![0, 2]];
        let mut cur = vec![0usize, 2];
        for &r in &requests {
            if !cur.contains(&r) {
                // move the server on the same side
                let i = cur.iter().position(|&c| c / 2 == r / 2).unwrap_or(0);
                cur[i] = r;
            }
            let mut c = cur.clone();
            c.sort_unstable();
            configs.push(c);
        }
        let trace = run(&mut s, &requests, Some(&configs)).unwrap();
        for st in &trace.steps {
            let a = st.audit.as_ref().unwrap();
            assert!(a.all_passed(), "step {}: {:?}", st.step, a);
        }
        assert!(trace.bound.unwrap().holds(1e-6));
    }

    #[test]
    fn empty_run_costs_nothing() {
        let mut s = KServerState::new(star(3), 2, 1, &[0, 1]).unwrap();
        let trace = run(&mut s, &[], None).unwrap();
        assert_eq!(trace.totals.full, 0.0);
    }
}
