//! Projection onto `P_t = P ∩ {x_{r_t,1} ≤ δ}` under the shifted entropy.
//!
//! Dual coordinate ascent (Bregman–Hildreth, i.e. Dykstra with half-space
//! corrections) over a working set of linear constraints that grows by
//! separation. Every constraint is `⟨c, x⟩ ≤ b` with `c ∈ {−1, 0, 1}^N`;
//! for a multiplier step `θ` the primal point moves as
//! `x̃_i ← x̃_i · exp(−θ c_i / w_i)`, so each step is a one dimensional root
//! find. The primal point is kept as an explicit function of the summed
//! multipliers, `x̃ = x̃_prev · exp(−(Cᵀμ)/w)`, which is also what makes the
//! multipliers a dual certificate.
//!
//! Root atoms are held at `1_{(j>h)}`: the previous point is root tight and
//! any increase would need an active root bound, so they never move.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::certificate::DualCertificate;
use super::DivergenceParams;
use crate::error::{check_len, Error, Result};
use crate::polytope::{check_membership, violated_subsets, PolytopeSpec, SubsetConstraint};
use crate::tree::AtomVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    /// Largest constraint violation accepted in the returned point.
    pub tol_feas: f64,
    /// Stopping threshold for violation and complementarity of the working set.
    pub tol_inner: f64,
    /// Cap on dual sweeps over the working set, summed over all rounds.
    pub max_sweeps: usize,
    /// Tolerance used to validate the starting point against `P_δ`.
    pub tol_start: f64,
    /// Largest stationarity / complementarity residual for which the
    /// multipliers are returned as a certificate.
    pub tol_certificate: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { tol_feas: 1e-9, tol_inner: 1e-12, max_sweeps: 100_000, tol_start: 1e-7, tol_certificate: 1e-6 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDiagnostics {
    pub sweeps: usize,
    pub rounds: usize,
    pub newton_steps: usize,
    pub active_set_size: usize,
    pub positive_multipliers: usize,
    pub feasibility_residual: f64,
    pub stationarity_residual: Option<f64>,
    pub complementarity_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub x: AtomVector,
    pub converged: bool,
    pub diagnostics: ProjectionDiagnostics,
    pub certificate: Option<DualCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum RowKey {
    Cap,
    Subset(usize, Vec<usize>),
    Lower(usize),
    Upper(usize),
}

#[derive(Debug, Clone)]
struct Row {
    key: RowKey,
    atoms: Vec<usize>,
    coef: Vec<f64>,
    rhs: f64,
    mu: f64,
}

struct Work {
    shift: f64,
    base: Vec<f64>,
    w: Vec<f64>,
    z: Vec<f64>,
    xt: Vec<f64>,
}

/// Sweeps between attempts of the Newton polish.
const NEWTON_EVERY: usize = 5;
/// Newton iterations per attempt.
const NEWTON_STEPS: usize = 30;

#[inline]
fn exp_clamped(v: f64) -> f64 {
    v.clamp(-745.0, 709.0).exp()
}

impl Work {
    /// Row residual `⟨c, x(θ)⟩ − b` and its derivative in `θ`.
    fn eval(&self, row: &Row, theta: f64) -> (f64, f64) {
        let mut g = -row.rhs;
        let mut dg = 0.0;
        for (&i, &c) in row.atoms.iter().zip(&row.coef) {
            let xi = if theta == 0.0 { self.xt[i] } else { self.xt[i] * exp_clamped(-theta * c / self.w[i]) };
            g += c * (xi - self.shift);
            dg -= c * c * xi / self.w[i];
        }
        (g, dg)
    }

    /// Rebuilds `z = Cᵀμ` and `x̃` from the multipliers.
    fn recompute(&mut self, rows: &[Row]) {
        self.z.iter_mut().for_each(|v| *v = 0.0);
        for row in rows {
            if row.mu != 0.0 {
                for (&i, &c) in row.atoms.iter().zip(&row.coef) {
                    self.z[i] += row.mu * c;
                }
            }
        }
        for i in 0..self.z.len() {
            self.xt[i] = self.base[i] * exp_clamped(-self.z[i] / self.w[i]);
        }
    }

    fn apply(&mut self, row: &Row, theta: f64) {
        for (&i, &c) in row.atoms.iter().zip(&row.coef) {
            self.z[i] += theta * c;
            self.xt[i] = self.base[i] * exp_clamped(-self.z[i] / self.w[i]);
        }
    }

    /// Root of the decreasing residual on `[lo, hi]` with `g(lo) > 0 ≥ g(hi)`.
    fn bracketed_root(&self, row: &Row, mut lo: f64, mut hi: f64, start: f64) -> f64 {
        let mut t = start;
        for _ in 0..200 {
            let (g, dg) = self.eval(row, t);
            if g.abs() <= 1e-15 {
                return t;
            }
            if g > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
                break;
            }
            let newton = if dg < 0.0 { t - g / dg } else { f64::NAN };
            t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        t
    }

    /// Multiplier change for one Hildreth step on `row`.
    fn step(&self, row: &Row) -> f64 {
        let (g0, dg0) = self.eval(row, 0.0);
        if g0 > 0.0 {
            let mut lo = 0.0;
            let mut hi = if dg0 < 0.0 { (g0 / -dg0).max(1e-300) } else { 1e-300 };
            let mut guard = 0;
            while self.eval(row, hi).0 > 0.0 {
                lo = hi;
                hi *= 4.0;
                guard += 1;
                if guard > 2000 {
                    break;
                }
            }
            self.bracketed_root(row, lo, hi, lo)
        } else if g0 < 0.0 && row.mu > 0.0 {
            let lo = -row.mu;
            if self.eval(row, lo).0 <= 0.0 {
                lo
            } else {
                self.bracketed_root(row, lo, 0.0, 0.0)
            }
        } else {
            0.0
        }
    }
}

/// One projected Newton step on the dual, restricted to rows with a
/// positive multiplier or a positive residual. The dual Hessian there is
/// `−C diag(x̃/w) Cᵀ`. Accepted only if the working residual drops;
/// otherwise the multipliers are restored and `false` is returned.
fn newton_step(work: &mut Work, rows: &mut [Row]) -> bool {
    let before = working_residual(work, rows);
    let active: Vec<usize> =
        (0..rows.len()).filter(|&k| rows[k].mu > 0.0 || work.eval(&rows[k], 0.0).0 > 0.0).collect();
    let m = active.len();
    if m == 0 {
        return false;
    }
    let n = work.xt.len();
    let scale: Vec<f64> = (0..n).map(|i| work.xt[i] / work.w[i]).collect();
    let mut dense = vec![0.0; n];
    let mut hess = DMatrix::<f64>::zeros(m, m);
    let mut grad = DVector::<f64>::zeros(m);
    for (p, &kp) in active.iter().enumerate() {
        let rp = &rows[kp];
        for (&i, &c) in rp.atoms.iter().zip(&rp.coef) {
            dense[i] = c * scale[i];
        }
        for (q, &kq) in active.iter().enumerate().skip(p) {
            let rq = &rows[kq];
            let v: f64 = rq.atoms.iter().zip(&rq.coef).map(|(&i, &c)| c * dense[i]).sum();
            hess[(p, q)] = v;
            hess[(q, p)] = v;
        }
        for &i in &rp.atoms {
            dense[i] = 0.0;
        }
        grad[p] = work.eval(rp, 0.0).0;
    }
    let diag_max = (0..m).map(|p| hess[(p, p)]).fold(0.0, f64::max);
    let mut ridge = 1e-13 * diag_max.max(f64::MIN_POSITIVE);
    let dir = loop {
        let mut reg = hess.clone();
        for p in 0..m {
            reg[(p, p)] += ridge;
        }
        if let Some(ch) = reg.cholesky() {
            break ch.solve(&grad);
        }
        ridge *= 100.0;
        if ridge > diag_max {
            return false;
        }
    };

    let saved: Vec<f64> = active.iter().map(|&k| rows[k].mu).collect();
    let mut alpha = 1.0;
    for _ in 0..20 {
        for (p, &k) in active.iter().enumerate() {
            rows[k].mu = (saved[p] + alpha * dir[p]).max(0.0);
        }
        work.recompute(rows);
        if working_residual(work, rows) < before {
            return true;
        }
        alpha *= 0.5;
    }
    for (p, &k) in active.iter().enumerate() {
        rows[k].mu = saved[p];
    }
    work.recompute(rows);
    false
}

/// Bregman projection of `x_prev` onto `P ∩ {x_{r,1} ≤ δ}`.
///
/// `spec.request` must be set. The starting point must lie in `P_δ` with a
/// tight root; a point that already meets the cap is returned unchanged.
pub fn project(
    x_prev: &AtomVector,
    spec: &PolytopeSpec<'_>,
    params: &DivergenceParams<'_>,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    let tree = spec.tree;
    check_len(tree.num_atoms(), x_prev.len())?;
    let request = spec.request.ok_or_else(|| Error::param("projection needs a requested leaf"))?;
    if request >= tree.num_leaves() {
        return Err(Error::param(format!("request {request} is not a leaf position")));
    }

    let start = check_membership(x_prev, &spec.shifted().without_request(), opts.tol_start)?;
    if !start.is_member() {
        return Err(Error::Infeasible(format!("starting point is not in the shifted polytope: {:?}", start.families)));
    }
    let root = tree.root();
    for (slot, a) in tree.atoms_of(root).enumerate() {
        if (x_prev[a] - spec.root_bound(slot)).abs() > opts.tol_start {
            return Err(Error::Infeasible(format!("root slot {} is not tight in the starting point", slot + 1)));
        }
    }

    let shift = params.shift;
    let cap_atom = tree.leaf_atom(request);
    let mut fixed_x = x_prev.clone();
    for (slot, a) in tree.atoms_of(root).enumerate() {
        fixed_x[a] = spec.root_bound(slot);
    }

    if x_prev[cap_atom] <= spec.delta {
        let cert = DualCertificate::zero(tree);
        return Ok(finish(x_prev, fixed_x, spec, params, opts, cert, ProjectionDiagnostics::default(), 0));
    }

    let base: Vec<f64> = fixed_x.0.iter().map(|v| v + shift).collect();
    let w: Vec<f64> = (0..tree.num_atoms()).map(|a| tree.weight(tree.atom_node(a))).collect();
    let mut work = Work { shift, xt: base.clone(), base, w, z: vec![0.0; tree.num_atoms()] };

    let mut rows: Vec<Row> = Vec::new();
    let mut index: HashMap<RowKey, usize> = HashMap::new();
    let push = |rows: &mut Vec<Row>, index: &mut HashMap<RowKey, usize>, row: Row| -> usize {
        if index.contains_key(&row.key) {
            return 0;
        }
        index.insert(row.key.clone(), rows.len());
        rows.push(row);
        1
    };
    push(&mut rows, &mut index, Row { key: RowKey::Cap, atoms: vec![cap_atom], coef: vec![1.0], rhs: spec.delta, mu: 0.0 });

    let mut diag = ProjectionDiagnostics::default();
    let sep_tol = (opts.tol_feas * 0.1).max(opts.tol_inner * 10.0);
    loop {
        diag.rounds += 1;
        loop {
            if diag.sweeps >= opts.max_sweeps {
                let residual = working_residual(&work, &rows);
                return Err(Error::NonConvergence { iterations: diag.sweeps, residual });
            }
            for row in rows.iter_mut() {
                let theta = work.step(row);
                if theta != 0.0 {
                    row.mu = (row.mu + theta).max(0.0);
                    work.apply(row, theta);
                }
            }
            diag.sweeps += 1;
            if working_residual(&work, &rows) <= opts.tol_inner {
                break;
            }
            if diag.sweeps % NEWTON_EVERY == 0 {
                for _ in 0..NEWTON_STEPS {
                    if !newton_step(&mut work, &mut rows) {
                        break;
                    }
                    diag.newton_steps += 1;
                    if working_residual(&work, &rows) <= opts.tol_inner {
                        break;
                    }
                }
                if working_residual(&work, &rows) <= opts.tol_inner {
                    break;
                }
            }
        }

        let x = current_point(&work, &fixed_x, tree.atoms_of(root));
        let mut added = 0;
        for (c, _) in violated_subsets(&x, tree, sep_tol) {
            added += push(&mut rows, &mut index, subset_row(spec, c));
        }
        for a in 0..x.len() {
            if x[a] < -sep_tol {
                added += push(&mut rows, &mut index, Row { key: RowKey::Lower(a), atoms: vec![a], coef: vec![-1.0], rhs: 0.0, mu: 0.0 });
            }
            if x[a] > 1.0 + sep_tol {
                added += push(&mut rows, &mut index, Row { key: RowKey::Upper(a), atoms: vec![a], coef: vec![1.0], rhs: 1.0, mu: 0.0 });
            }
        }
        if added == 0 {
            break;
        }
    }

    let x = current_point(&work, &fixed_x, tree.atoms_of(root));
    diag.active_set_size = rows.len();
    diag.positive_multipliers = rows.iter().filter(|r| r.mu > 0.0).count();

    let mut cert = DualCertificate::zero(tree);
    for row in &rows {
        if row.mu <= 0.0 {
            continue;
        }
        match &row.key {
            RowKey::Cap => cert.gamma = row.mu,
            RowKey::Subset(u, members) => {
                cert.subsets.push((SubsetConstraint { parent: *u, members: members.clone() }, row.mu));
            }
            RowKey::Lower(a) => cert.box_lower.push((*a, row.mu)),
            RowKey::Upper(a) => cert.box_upper.push((*a, row.mu)),
        }
    }
    cert.subsets.sort_by(|a, b| a.0.cmp(&b.0));
    cert.fill_root(tree);

    let sweeps = diag.sweeps;
    Ok(finish(x_prev, x, spec, params, opts, cert, diag, sweeps))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x_prev: &AtomVector,
    x: AtomVector,
    spec: &PolytopeSpec<'_>,
    params: &DivergenceParams<'_>,
    opts: &ProjectionOptions,
    cert: DualCertificate,
    mut diag: ProjectionDiagnostics,
    sweeps: usize,
) -> ProjectionResult {
    let tree = spec.tree;
    diag.sweeps = sweeps;
    diag.feasibility_residual = feasibility_residual(&x, spec);
    let cap_atom = tree.leaf_atom(spec.request.expect("checked"));
    let stat = cert.stationarity_residual(x_prev, &x, tree, params.shift, cap_atom);
    let comp = cert.complementarity_residual(&x, tree, spec, cap_atom);
    diag.stationarity_residual = Some(stat);
    diag.complementarity_residual = Some(comp);
    let usable = stat <= opts.tol_certificate && comp <= opts.tol_certificate;
    ProjectionResult {
        converged: diag.feasibility_residual <= opts.tol_feas,
        x,
        diagnostics: diag,
        certificate: usable.then_some(cert),
    }
}

fn current_point(work: &Work, fixed: &AtomVector, root_atoms: std::ops::Range<usize>) -> AtomVector {
    let mut x = AtomVector(work.xt.iter().map(|v| v - work.shift).collect());
    for a in root_atoms {
        x[a] = fixed[a];
    }
    x
}

fn subset_row(spec: &PolytopeSpec<'_>, c: SubsetConstraint) -> Row {
    let tree = spec.tree;
    let s = c.members.len();
    let mut atoms = Vec::with_capacity(2 * s);
    let mut coef = Vec::with_capacity(2 * s);
    let mut rhs = 0.0;
    if c.parent == tree.root() {
        rhs = -(0..s).map(|slot| spec.root_bound(slot)).sum::<f64>();
    } else {
        for a in tree.atoms_of(c.parent).take(s) {
            atoms.push(a);
            coef.push(1.0);
        }
    }
    for &a in &c.members {
        atoms.push(a);
        coef.push(-1.0);
    }
    Row { key: RowKey::Subset(c.parent, c.members), atoms, coef, rhs, mu: 0.0 }
}

/// Largest violation or complementarity gap over the working set.
fn working_residual(work: &Work, rows: &[Row]) -> f64 {
    rows.iter()
        .map(|row| {
            let g = work.eval(row, 0.0).0;
            if row.mu > 0.0 {
                g.abs()
            } else {
                g.max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Largest violation of box, cap and subset constraints (root is exact).
pub(crate) fn feasibility_residual(x: &AtomVector, spec: &PolytopeSpec<'_>) -> f64 {
    let tree = spec.tree;
    let mut worst: f64 = 0.0;
    for a in 0..x.len() {
        worst = worst.max(-x[a]).max(x[a] - 1.0);
    }
    if let Some(r) = spec.request {
        worst = worst.max(x[tree.leaf_atom(r)] - spec.delta);
    }
    for (_, amount) in violated_subsets(x, tree, 0.0) {
        worst = worst.max(amount);
    }
    worst
}

impl<'a> PolytopeSpec<'a> {
    pub(crate) fn without_request(mut self) -> Self {
        self.request = None;
        self
    }
}
