use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bregproj_core::harness::experiment::{adversarial_kserver, adversarial_paging, kserver_opt};
use bregproj_core::harness::generate::{
    cyclic_requests, generate_hst, random_tree, rng_from_seed, uniform_requests, RandomTreeParams, RequestModel,
    RNG_NAME,
};
use bregproj_core::harness::instance::{read_json, write_json};
use bregproj_core::harness::{
    read_summary, report_text, run_experiment, Algorithm, AuditLevel, ExperimentConfig, Instance, InstanceSource,
    KServerInput, KServerInstance, OutputPaths, PagingInstance, Tolerances,
};
use bregproj_core::kserver::KServerState;
use bregproj_core::offline::{opt_paging, opt_setcover};
use bregproj_core::paging::{PagingParams, PagingState};
use bregproj_core::tree::{TreeJson, WeightedTree};

const EXIT_AUDIT: u8 = 4;

#[derive(Parser)]
#[command(name = "bregproj", version, about = "Online k-server, paging and set cover by Bregman projection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tree: a complete HST, or a random uniform-depth tree with --random.
    GenTree(GenTreeArgs),
    /// Generate a k-server (--tree) or weighted paging (--pages) instance.
    GenRequests(GenRequestsArgs),
    /// Run an experiment described by a JSON config.
    Run(RunArgs),
    /// Solve an instance offline.
    Opt(OptArgs),
    /// Run one instance with every audit enabled.
    Audit(AuditArgs),
    /// Summarize one or more summary CSV files.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenTreeArgs {
    #[arg(long, default_value_t = 2)]
    branching: usize,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    #[arg(long, default_value_t = 1.0)]
    root_weight: f64,
    /// Random shape instead of a complete tree.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 3)]
    max_children: usize,
    #[arg(long, default_value_t = 10)]
    max_leaves: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenRequestsArgs {
    /// Tree file; produces a k-server instance.
    #[arg(long, conflicts_with = "pages")]
    tree: Option<PathBuf>,
    /// Number of pages; produces a weighted paging instance.
    #[arg(long)]
    pages: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    h: usize,
    #[arg(long, default_value = "uniform-random")]
    model: RequestModel,
    #[arg(long, default_value_t = 20)]
    length: usize,
    #[arg(long, default_value_t = 1.0)]
    weight_min: f64,
    #[arg(long, default_value_t = 100.0)]
    weight_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Write trace.jsonl, summary.csv and plot.csv here instead of the
    /// config's output paths.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "audit-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    summaries: Vec<PathBuf>,
}

#[derive(Serialize)]
struct TreeMetadata {
    generator: &'static str,
    rng: Option<&'static str>,
    seed: Option<u64>,
    ratio: f64,
    /// Uniform weights (ratio 1) give a valid tree that is not an HST.
    hst: bool,
}

#[derive(Serialize)]
struct GeneratedTree {
    #[serde(flatten)]
    tree: TreeJson,
    metadata: TreeMetadata,
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_json(path, value).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn gen_tree(a: &GenTreeArgs) -> Result<()> {
    let (tree, metadata) = if a.random {
        let params =
            RandomTreeParams { depth: a.depth, max_children: a.max_children, max_leaves: a.max_leaves, ratio: a.ratio };
        let tree = random_tree(&params, &mut rng_from_seed(a.seed))?;
        let meta = TreeMetadata { generator: "random", rng: Some(RNG_NAME), seed: Some(a.seed), ratio: a.ratio, hst: false };
        (tree, meta)
    } else {
        let tree = generate_hst(a.branching, a.depth, a.ratio, a.root_weight)?;
        let meta = TreeMetadata { generator: "hst", rng: None, seed: None, ratio: a.ratio, hst: a.ratio < 1.0 };
        (tree, meta)
    };
    emit(&GeneratedTree { tree: tree.to_json(), metadata }, a.out.as_deref())
}

fn gen_requests(a: &GenRequestsArgs) -> Result<()> {
    let mut rng = rng_from_seed(a.seed);
    if let Some(path) = &a.tree {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let tree = WeightedTree::from_json_str(&text)?;
        let n = tree.num_leaves();
        if !(1 <= a.h && a.h <= a.k && a.k < n) {
            bail!(bregproj_core::Error::InvalidParameter(format!(
                "need 1 ≤ h ≤ k < n, got h={}, k={}, n={n}",
                a.h, a.k
            )));
        }
        let initial = rand::seq::index::sample(&mut rng, n, a.k).into_vec();
        let requests = match a.model {
            RequestModel::UniformRandom => uniform_requests(n, a.length, &mut rng),
            RequestModel::CyclicKPlus1 => cyclic_requests(n, a.k, a.length, &mut rng)?,
            RequestModel::AdversarialGreedy => {
                adversarial_kserver(&KServerState::new(tree.clone(), a.k, a.h, &initial)?, a.length)?
            }
        };
        let opt_initial = initial[..a.h].to_vec();
        let input = KServerInput { tree, k: a.k, h: a.h, initial, requests, opt_initial };
        return emit(&KServerInstance::from_input(&input), a.out.as_deref());
    }
    let Some(n) = a.pages else {
        bail!(bregproj_core::Error::InvalidParameter("pass either --tree or --pages".into()));
    };
    if !(a.weight_min > 0.0 && a.weight_min <= a.weight_max) {
        bail!(bregproj_core::Error::InvalidParameter("weights need 0 < min ≤ max".into()));
    }
    use rand::Rng;
    let weights: Vec<f64> = (0..n)
        .map(|_| if a.weight_min == a.weight_max { a.weight_min } else { rng.gen_range(a.weight_min..a.weight_max) })
        .collect();
    let params = PagingParams::new(weights.clone(), a.k, a.h)?;
    let initial = rand::seq::index::sample(&mut rng, n, a.k).into_vec();
    let requests = match a.model {
        RequestModel::UniformRandom => uniform_requests(n, a.length, &mut rng),
        RequestModel::CyclicKPlus1 => cyclic_requests(n, a.k, a.length, &mut rng)?,
        RequestModel::AdversarialGreedy => adversarial_paging(&PagingState::new(params, &initial)?, a.length)?,
    };
    let inst = PagingInstance { weights, k: a.k, h: a.h, requests, initial, opt_initial: None };
    emit(&inst, a.out.as_deref())
}

/// Prints the digest and returns whether every audit and bound held.
fn summarize(rows: &[bregproj_core::harness::SummaryRow]) -> bool {
    print!("{}", report_text(rows));
    rows.iter().all(|r| r.audit_fail == 0 && r.bound_holds != Some(false))
}

fn run(a: &RunArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = ExperimentConfig::from_json_str(&text)?;
    if let Some(dir) = &a.out_dir {
        cfg.output = OutputPaths::in_dir(dir);
    }
    let report = run_experiment(&cfg)?;
    eprintln!("wrote {}, {}, {}", cfg.output.trace.display(), cfg.output.summary.display(), cfg.output.plot.display());
    Ok(summarize(&report.rows))
}

fn read_instance(path: &Path) -> Result<Instance> {
    read_json(path).with_context(|| format!("reading instance {}", path.display()))
}

#[derive(Serialize)]
struct KServerSolution {
    cost: f64,
    configs: Vec<Vec<String>>,
}

fn opt(a: &OptArgs) -> Result<()> {
    let out = a.out.as_deref();
    match read_instance(&a.instance)? {
        Instance::KServer(inst) => {
            let input = inst.resolve()?;
            let Some(sol) = kserver_opt(&input)? else {
                bail!(bregproj_core::Error::SizeLimit("instance too large for the offline solvers".into()));
            };
            let tree = &input.tree;
            let configs =
                sol.configs.iter().map(|c| c.iter().map(|&p| tree.id(tree.leaf_node(p)).to_string()).collect()).collect();
            emit(&KServerSolution { cost: sol.cost, configs }, out)
        }
        Instance::Paging(inst) => emit(&opt_paging(&inst.weights, inst.h, &inst.requests, &inst.opt_start())?, out),
        Instance::SetCover(inst) => emit(&opt_setcover(inst.n, &inst.boolean_rows()?)?, out),
    }
}

fn audit(a: &AuditArgs) -> Result<bool> {
    let algorithm = match read_instance(&a.instance)? {
        Instance::KServer(_) => Algorithm::Kserver,
        Instance::Paging(_) => Algorithm::Paging,
        Instance::SetCover(_) => Algorithm::Setcover,
    };
    let cfg = ExperimentConfig {
        schema_version: bregproj_core::harness::config::SCHEMA_VERSION,
        algorithm,
        seed: 0,
        instances: InstanceSource::File { path: a.instance.clone() },
        audit: AuditLevel::Full,
        output: OutputPaths::in_dir(&a.out_dir),
        tolerances: Tolerances::default(),
    };
    let report = run_experiment(&cfg)?;
    Ok(summarize(&report.rows))
}

fn report(a: &ReportArgs) -> Result<()> {
    let mut rows = Vec::new();
    for path in &a.summaries {
        rows.extend(read_summary(path).with_context(|| format!("reading {}", path.display()))?);
    }
    print!("{}", report_text(&rows));
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<bregproj_core::Error>())
        .map_or(2, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::GenTree(a) => gen_tree(a).map(|_| true),
        Command::GenRequests(a) => gen_requests(a).map(|_| true),
        Command::Run(a) => run(a),
        Command::Opt(a) => opt(a).map(|_| true),
        Command::Audit(a) => audit(a),
        Command::Report(a) => report(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: audit or bound failures");
            ExitCode::from(EXIT_AUDIT)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
