//! Experiment runner: instances in, trace / summary / plot files out.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{Algorithm, AuditLevel, ExperimentConfig, GeneratorSpec, InstanceSource, Tolerances, TreeSpec};
use super::generate::{
    argmax_first, cyclic_requests, generate_hst, random_tree, rng_from_seed, uniform_requests, RequestModel, RNG_NAME,
};
use super::instance::{read_json, KServerInput, KServerInstance, PagingInstance, SetCoverInstance};
use crate::error::{Error, Result};
use crate::kserver::{run as kserver_run, AggregateBound, KServerState};
use crate::offline::{opt_kserver, opt_kserver_flow, opt_paging, opt_setcover, OfflineSolution};
use crate::paging::{paging_run, PagingParams, PagingState, PAGING_TOL};
use crate::setcover::sc_run;
use crate::tree::WeightedTree;

/// Names of the checks that need no comparator.
const STRUCTURAL_CHECKS: [&str; 5] = ["root_tight", "box", "slot_monotone", "level_mass", "leaf_flow"];

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub rng: String,
    pub depth: Option<usize>,
    pub n: usize,
    pub k: Option<usize>,
    pub h: Option<usize>,
    pub delta: Option<f64>,
    pub steps: usize,
    pub alg_cost: f64,
    pub alg_positive_cost: f64,
    /// Offline optimum in the problem's own cost (server distance,
    /// eviction weight or number of sets).
    pub opt_cost: Option<f64>,
    /// The comparator quantity the bound multiplies.
    pub opt_bound_quantity: Option<f64>,
    /// Bounded ALG quantity divided by `opt_bound_quantity`.
    pub ratio: Option<f64>,
    /// Multiplicative factor of the guarantee.
    pub bound: f64,
    /// Run-computed additive term of the guarantee.
    pub additive: Option<f64>,
    pub bound_holds: Option<bool>,
    pub audit_pass: usize,
    pub audit_fail: usize,
    pub audit_skipped: usize,
}

/// One row of the plot CSV: cumulative costs after each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub instance: usize,
    pub step: usize,
    pub alg_cumulative: f64,
    pub opt_cumulative: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub summary: SummaryRow,
    pub trace: Vec<Value>,
    pub plot: Vec<PlotRow>,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn audit_failures(&self) -> usize {
        self.rows.iter().map(|r| r.audit_fail).sum()
    }

    pub fn bound_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.bound_holds == Some(false)).count()
    }
}

fn trace_line(instance: usize, record: &impl Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(record)?;
    if let Value::Object(map) = &mut v {
        map.insert("instance".into(), Value::from(instance));
    }
    Ok(v)
}

fn choose(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    pool.truncate(k);
    pool
}

pub fn build_tree(spec: &TreeSpec, rng: &mut impl Rng) -> Result<WeightedTree> {
    match spec {
        TreeSpec::Hst { branching, depth, ratio, root_weight } => generate_hst(*branching, *depth, *ratio, *root_weight),
        TreeSpec::Random(p) => random_tree(p, rng),
    }
}

/// Requests against a running k-server state: the leaf with the largest
/// anti-server value, smallest position on ties.
pub fn adversarial_kserver(state: &KServerState, len: usize) -> Result<Vec<usize>> {
    let mut sim = state.clone();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let tree = &sim.tree;
        let r = argmax_first((0..tree.num_leaves()).map(|p| sim.x[tree.leaf_atom(p)])).expect("tree has leaves");
        sim.serve(r)?;
        out.push(r);
    }
    Ok(out)
}

/// Requests against a running paging state: the page with the largest
/// value, smallest index on ties.
pub fn adversarial_paging(state: &PagingState, len: usize) -> Result<Vec<usize>> {
    let mut sim = state.clone();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let r = argmax_first(sim.a.iter().copied()).expect("pages exist");
        sim.serve(r)?;
        out.push(r);
    }
    Ok(out)
}

pub fn generate_kserver(spec: &GeneratorSpec, rng: &mut impl Rng) -> Result<KServerInput> {
    let GeneratorSpec::Kserver { tree, k, h, requests } = spec else {
        return Err(Error::param("not a k-server generator"));
    };
    let tree = build_tree(tree, rng)?;
    let n = tree.num_leaves();
    if !(1 <= *h && h <= k && *k < n) {
        return Err(Error::param(format!("need 1 ≤ h ≤ k < n, got h={h}, k={k}, n={n}")));
    }
    let initial = choose(n, *k, rng);
    let opt_initial = initial[..*h].to_vec();
    let seq = match requests.model {
        RequestModel::UniformRandom => uniform_requests(n, requests.length, rng),
        RequestModel::CyclicKPlus1 => cyclic_requests(n, *k, requests.length, rng)?,
        RequestModel::AdversarialGreedy => {
            adversarial_kserver(&KServerState::new(tree.clone(), *k, *h, &initial)?, requests.length)?
        }
    };
    Ok(KServerInput { tree, k: *k, h: *h, initial, requests: seq, opt_initial })
}

pub fn generate_paging(spec: &GeneratorSpec, rng: &mut impl Rng) -> Result<PagingInstance> {
    let GeneratorSpec::Paging { n, k, h, weight_range: (lo, hi), requests } = spec else {
        return Err(Error::param("not a paging generator"));
    };
    if !(*lo > 0.0 && lo <= hi) {
        return Err(Error::param(format!("weight range [{lo}, {hi}] must be positive and ordered")));
    }
    let weights: Vec<f64> = (0..*n).map(|_| if lo == hi { *lo } else { rng.gen_range(*lo..*hi) }).collect();
    let params = PagingParams::new(weights.clone(), *k, *h)?;
    let initial = choose(*n, *k, rng);
    let seq = match requests.model {
        RequestModel::UniformRandom => uniform_requests(*n, requests.length, rng),
        RequestModel::CyclicKPlus1 => cyclic_requests(*n, *k, requests.length, rng)?,
        RequestModel::AdversarialGreedy => adversarial_paging(&PagingState::new(params, &initial)?, requests.length)?,
    };
    Ok(PagingInstance { weights, k: *k, h: *h, requests: seq, initial, opt_initial: None })
}

pub fn generate_setcover(spec: &GeneratorSpec, rng: &mut impl Rng) -> Result<SetCoverInstance> {
    let GeneratorSpec::Setcover { n, rows, density } = spec else {
        return Err(Error::param("not a set cover generator"));
    };
    if *n == 0 || !(*density > 0.0 && *density <= 1.0) {
        return Err(Error::param("set cover generator needs n ≥ 1 and density in (0,1]"));
    }
    let mut out = Vec::with_capacity(*rows);
    while out.len() < *rows {
        let row: Vec<u8> = (0..*n).map(|_| u8::from(rng.gen_bool(*density))).collect();
        if row.contains(&1) {
            out.push(row);
        }
    }
    Ok(SetCoverInstance { n: *n, rows: out })
}

/// Offline optimum by configuration DP, falling back to min-cost flow when
/// the DP is too large; `None` when neither applies.
pub fn kserver_opt(input: &KServerInput) -> Result<Option<OfflineSolution>> {
    match opt_kserver(&input.tree, input.h, &input.requests, &input.opt_initial) {
        Ok(s) => Ok(Some(s)),
        Err(Error::SizeLimit(_)) => match opt_kserver_flow(&input.tree, input.h, &input.requests, &input.opt_initial) {
            Ok(s) => Ok(Some(s)),
            Err(Error::SizeLimit(_)) => Ok(None),
            Err(e) => Err(e),
        },
        Err(e) => Err(e),
    }
}

fn opt_cumulative(opt: Option<&OfflineSolution>, step_cost: impl Fn(&[usize], &[usize]) -> Result<f64>) -> Result<Option<Vec<f64>>> {
    let Some(opt) = opt else { return Ok(None) };
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(opt.configs.len());
    for w in opt.configs.windows(2) {
        acc += step_cost(&w[0], &w[1])?;
        out.push(acc);
    }
    Ok(Some(out))
}

pub fn run_kserver_instance(
    id: usize,
    seed: u64,
    input: &KServerInput,
    audit: AuditLevel,
    tol: &Tolerances,
) -> Result<InstanceOutcome> {
    let opt = kserver_opt(input)?;
    let mut state = KServerState::new(input.tree.clone(), input.k, input.h, &input.initial)?;
    state.options = tol.projection;
    let comparator = opt.as_ref().map(|o| o.configs.as_slice());
    let mut trace = kserver_run(&mut state, &input.requests, comparator)?;
    for rec in &mut trace.steps {
        match audit {
            AuditLevel::Off => rec.audit = None,
            AuditLevel::Primal => {
                if let Some(a) = &mut rec.audit {
                    a.checks.retain(|c| STRUCTURAL_CHECKS.contains(&c.name.as_str()));
                }
            }
            AuditLevel::Full => {}
        }
    }
    let (pass, fail, skipped) = trace.audit_counts();
    let tree = &input.tree;
    let delta = state.delta;
    let bound = AggregateBound::ratio_factor(tree.height(), delta);
    let agg = trace.bound;
    let opt_cum = opt_cumulative(opt.as_ref(), |a, b| {
        crate::tree::server_distance(
            &crate::tree::ServerVector::from_leaves(tree, a)?,
            &crate::tree::ServerVector::from_leaves(tree, b)?,
            tree,
        )
    })?;
    let mut plot = Vec::with_capacity(trace.steps.len());
    let mut acc = 0.0;
    for (t, rec) in trace.steps.iter().enumerate() {
        acc += rec.movement;
        plot.push(PlotRow {
            instance: id,
            step: rec.step,
            alg_cumulative: acc,
            opt_cumulative: opt_cum.as_ref().map(|c| c[t]),
        });
    }
    let lines = trace.steps.iter().map(|r| trace_line(id, r)).collect::<Result<_>>()?;
    let summary = SummaryRow {
        instance: id,
        algorithm: Algorithm::Kserver,
        seed,
        rng: RNG_NAME.into(),
        depth: Some(tree.height()),
        n: tree.num_leaves(),
        k: Some(input.k),
        h: Some(input.h),
        delta: Some(delta),
        steps: input.requests.len(),
        alg_cost: trace.totals.full,
        alg_positive_cost: trace.totals.positive,
        opt_cost: opt.as_ref().map(|o| o.cost),
        opt_bound_quantity: agg.map(|b| b.opt_positive),
        ratio: agg.and_then(|b| (b.opt_positive > 0.0).then(|| b.alg_positive / b.opt_positive)),
        bound,
        additive: agg.map(|b| b.rhs - bound * b.opt_positive),
        bound_holds: agg.map(|b| b.holds(tol.bound)),
        audit_pass: pass,
        audit_fail: fail,
        audit_skipped: skipped,
    };
    Ok(InstanceOutcome { summary, trace: lines, plot })
}

pub fn run_paging_instance(
    id: usize,
    seed: u64,
    inst: &PagingInstance,
    audit: AuditLevel,
    tol: &Tolerances,
) -> Result<InstanceOutcome> {
    let params = PagingParams::new(inst.weights.clone(), inst.k, inst.h)?;
    let opt = match opt_paging(&inst.weights, inst.h, &inst.requests, &inst.opt_start()) {
        Ok(s) => Some(s),
        Err(Error::SizeLimit(_)) => None,
        Err(e) => return Err(e),
    };
    let delta = params.delta;
    let mut state = PagingState::new(params, &inst.initial)?;
    let trace = paging_run(&mut state, &inst.requests, opt.as_ref().map(|o| o.configs.as_slice()))?;
    let (mut pass, mut fail) = (0, 0);
    let mut tally = |ok: bool| if ok { pass += 1 } else { fail += 1 };
    for rec in &trace.steps {
        if audit == AuditLevel::Off {
            continue;
        }
        tally(rec.property_residual <= PAGING_TOL);
        if audit == AuditLevel::Full {
            if let Some(v) = rec.charge_residual {
                tally(v <= 1e-7);
            }
            if let Some(v) = rec.pythagorean_residual {
                tally(v <= 1e-7);
            }
        }
    }
    let opt_cum = opt_cumulative(opt.as_ref(), |a, b| Ok(crate::offline::eviction_cost(a, b, &inst.weights)))?;
    let mut plot = Vec::new();
    let mut acc = 0.0;
    for (t, rec) in trace.steps.iter().enumerate() {
        acc += rec.movement;
        plot.push(PlotRow { instance: id, step: rec.step, alg_cumulative: acc, opt_cumulative: opt_cum.as_ref().map(|c| c[t]) });
    }
    let lines = trace.steps.iter().map(|r| trace_line(id, r)).collect::<Result<_>>()?;
    let factor = 2.0 * (1.0 / delta).ln();
    let b = trace.bound;
    let summary = SummaryRow {
        instance: id,
        algorithm: Algorithm::Paging,
        seed,
        rng: RNG_NAME.into(),
        depth: Some(1),
        n: inst.weights.len(),
        k: Some(inst.k),
        h: Some(inst.h),
        delta: Some(delta),
        steps: inst.requests.len(),
        alg_cost: trace.movement,
        alg_positive_cost: trace.positive_movement,
        opt_cost: opt.as_ref().map(|o| o.cost),
        opt_bound_quantity: b.map(|b| b.opt_movement),
        ratio: b.and_then(|b| (b.opt_movement > 0.0).then(|| b.alg_movement / b.opt_movement)),
        bound: factor,
        additive: b.map(|b| b.additive),
        bound_holds: b.map(|b| b.holds(tol.bound)),
        audit_pass: pass,
        audit_fail: fail,
        audit_skipped: 0,
    };
    Ok(InstanceOutcome { summary, trace: lines, plot })
}

pub fn run_setcover_instance(
    id: usize,
    seed: u64,
    inst: &SetCoverInstance,
    audit: AuditLevel,
    tol: &Tolerances,
) -> Result<InstanceOutcome> {
    let rows = inst.boolean_rows()?;
    let opt = match opt_setcover(inst.n, &rows) {
        Ok(s) => Some(s),
        Err(Error::SizeLimit(_)) => None,
        Err(e) => return Err(e),
    };
    let trace = sc_run(inst.n, &rows, opt.as_ref().map(|o| o.configs.as_slice()))?;
    let (mut pass, mut fail, mut skipped) = (0, 0, 0);
    for rec in &trace.steps {
        if audit == AuditLevel::Off {
            continue;
        }
        if rec.feasibility_residual <= 1e-12 {
            pass += 1;
        } else {
            fail += 1;
        }
        if audit == AuditLevel::Full {
            for v in [rec.starred_residual, rec.opt_charge_residual] {
                match v {
                    Some(v) if v <= 1e-9 => pass += 1,
                    Some(_) => fail += 1,
                    None => skipped += 1,
                }
            }
        }
    }
    let mut plot = Vec::new();
    for (t, rec) in trace.steps.iter().enumerate() {
        plot.push(PlotRow {
            instance: id,
            step: rec.step,
            alg_cumulative: rec.cost,
            opt_cumulative: opt.as_ref().map(|o| o.configs[t + 1].len() as f64),
        });
    }
    let lines = trace.steps.iter().map(|r| trace_line(id, r)).collect::<Result<_>>()?;
    let ln_n = (inst.n as f64).ln();
    let summary = SummaryRow {
        instance: id,
        algorithm: Algorithm::Setcover,
        seed,
        rng: RNG_NAME.into(),
        depth: None,
        n: inst.n,
        k: None,
        h: None,
        delta: Some(1.0 / inst.n as f64),
        steps: rows.len(),
        alg_cost: trace.final_cost,
        alg_positive_cost: trace.final_cost - 1.0,
        opt_cost: opt.as_ref().map(|o| o.cost),
        opt_bound_quantity: opt.as_ref().map(|o| o.cost),
        ratio: opt.as_ref().and_then(|o| (o.cost > 0.0).then(|| trace.final_cost / o.cost)),
        bound: ln_n,
        additive: Some(1.0),
        bound_holds: opt.as_ref().map(|o| trace.final_cost <= ln_n * o.cost + 1.0 + tol.bound.min(1e-9)),
        audit_pass: pass,
        audit_fail: fail,
        audit_skipped: skipped,
    };
    Ok(InstanceOutcome { summary, trace: lines, plot })
}

/// Generates or loads the configured instances and runs them in order.
pub fn run_outcomes(cfg: &ExperimentConfig) -> Result<Vec<InstanceOutcome>> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let tol = &cfg.tolerances;
    let mut out = Vec::new();
    match &cfg.instances {
        InstanceSource::File { path } => {
            let outcome = match cfg.algorithm {
                Algorithm::Kserver => {
                    let inst: KServerInstance = read_json(path)?;
                    run_kserver_instance(0, cfg.seed, &inst.resolve()?, cfg.audit, tol)?
                }
                Algorithm::Paging => run_paging_instance(0, cfg.seed, &read_json(path)?, cfg.audit, tol)?,
                Algorithm::Setcover => run_setcover_instance(0, cfg.seed, &read_json(path)?, cfg.audit, tol)?,
            };
            out.push(outcome);
        }
        InstanceSource::Generate { spec, count } => {
            for id in 0..*count {
                let outcome = match cfg.algorithm {
                    Algorithm::Kserver => {
                        run_kserver_instance(id, cfg.seed, &generate_kserver(spec, &mut rng)?, cfg.audit, tol)?
                    }
                    Algorithm::Paging => {
                        run_paging_instance(id, cfg.seed, &generate_paging(spec, &mut rng)?, cfg.audit, tol)?
                    }
                    Algorithm::Setcover => {
                        run_setcover_instance(id, cfg.seed, &generate_setcover(spec, &mut rng)?, cfg.audit, tol)?
                    }
                };
                out.push(outcome);
            }
        }
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs the experiment and writes the trace JSONL, summary CSV and plot CSV.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let outcomes = run_outcomes(cfg)?;

    let mut trace = create(&cfg.output.trace)?;
    for o in &outcomes {
        for line in &o.trace {
            serde_json::to_writer(&mut trace, line)?;
            trace.write_all(b"\n")?;
        }
    }
    trace.flush()?;

    let mut summary = csv::Writer::from_writer(create(&cfg.output.summary)?);
    for o in &outcomes {
        summary.serialize(&o.summary)?;
    }
    summary.flush()?;

    let mut plot = csv::Writer::from_writer(create(&cfg.output.plot)?);
    for o in &outcomes {
        for row in &o.plot {
            plot.serialize(row)?;
        }
    }
    plot.flush()?;

    Ok(ExperimentReport { rows: outcomes.into_iter().map(|o| o.summary).collect() })
}

/// Reads a summary CSV written by [`run_experiment`].
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
    Ok(rows)
}

/// Plain-text digest of summary rows.
pub fn report_text(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let count = rows.len();
    let with_ratio: Vec<&SummaryRow> = rows.iter().filter(|r| r.ratio.is_some()).collect();
    let max_ratio = with_ratio.iter().filter_map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let mean_ratio = if with_ratio.is_empty() {
        f64::NAN
    } else {
        with_ratio.iter().filter_map(|r| r.ratio).sum::<f64>() / with_ratio.len() as f64
    };
    let holds = rows.iter().filter(|r| r.bound_holds == Some(true)).count();
    let broken = rows.iter().filter(|r| r.bound_holds == Some(false)).count();
    let (pass, fail, skipped) = rows.iter().fold((0, 0, 0), |acc, r| {
        (acc.0 + r.audit_pass, acc.1 + r.audit_fail, acc.2 + r.audit_skipped)
    });
    s.push_str(&format!("instances: {count}\n"));
    s.push_str(&format!("instances with an offline optimum: {}\n", with_ratio.len()));
    if !with_ratio.is_empty() {
        s.push_str(&format!("ratio: mean {mean_ratio:.4}, max {max_ratio:.4}\n"));
    }
    s.push_str(&format!("bound holds: {holds}, violated: {broken}\n"));
    s.push_str(&format!("audit checks: {pass} passed, {fail} failed, {skipped} skipped\n"));
    for r in rows.iter().filter(|r| r.bound_holds == Some(false) || r.audit_fail > 0) {
        s.push_str(&format!(
            "  instance {}: bound_holds={:?}, audit failures={}\n",
            r.instance, r.bound_holds, r.audit_fail
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{OutputPaths, RequestSpec, SCHEMA_VERSION};

    fn kserver_cfg(dir: &Path, model: RequestModel) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            algorithm: Algorithm::Kserver,
            seed: 5,
            instances: InstanceSource::Generate {
                spec: GeneratorSpec::Kserver {
                    tree: TreeSpec::Hst { branching: 2, depth: 2, ratio: 0.5, root_weight: 1.0 },
                    k: 2,
                    h: 2,
                    requests: RequestSpec { model, length: 8 },
                },
                count: 2,
            },
            audit: AuditLevel::Full,
            output: OutputPaths::in_dir(dir),
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn kserver_experiment_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = kserver_cfg(dir.path(), RequestModel::UniformRandom);
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.audit_failures(), 0);
        assert_eq!(report.bound_failures(), 0);
        let lines = std::fs::read_to_string(&cfg.output.trace).unwrap();
        assert_eq!(lines.lines().count(), 16);
        let rows = read_summary(&cfg.output.summary).unwrap();
        assert_eq!(rows, report.rows);
    }

    #[test]
    fn adversarial_star_alternates() {
        let mut recs = vec![crate::tree::NodeRecord { id: "r".into(), parent: None, weight: 1.0 }];
        for id in ["u", "v"] {
            recs.push(crate::tree::NodeRecord { id: id.into(), parent: Some("r".into()), weight: 1.0 });
        }
        let t = WeightedTree::from_records(recs).unwrap();
        let state = KServerState::new(t, 1, 1, &[0]).unwrap();
        assert_eq!(adversarial_kserver(&state, 6).unwrap(), vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn paging_and_setcover_experiments() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = kserver_cfg(dir.path(), RequestModel::CyclicKPlus1);
        cfg.algorithm = Algorithm::Paging;
        cfg.instances = InstanceSource::Generate {
            spec: GeneratorSpec::Paging {
                n: 3,
                k: 2,
                h: 2,
                weight_range: (1.0, 1.0),
                requests: RequestSpec { model: RequestModel::CyclicKPlus1, length: 30 },
            },
            count: 1,
        };
        let report = run_experiment(&cfg).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.bound_holds, Some(true));
        assert_eq!(row.audit_fail, 0);

        cfg.algorithm = Algorithm::Setcover;
        cfg.instances =
            InstanceSource::Generate { spec: GeneratorSpec::Setcover { n: 6, rows: 10, density: 0.3 }, count: 3 };
        let report = run_experiment(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.bound_holds == Some(true) && r.audit_fail == 0));
        assert!(report_text(&report.rows).contains("instances: 3"));
    }
}
