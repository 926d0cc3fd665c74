//! Command-line interface: pinwheel checks, symmetric-tree analysis, the
//! admission solver, model emission/certification, bundle replay and the
//! experiment drivers.

use anyhow::{anyhow, bail, Context, Result};
use backhaul_core::dsum::{bundle_from_json, bundle_to_json, dsum_with_stats, urr_baseline};
use backhaul_core::experiment::{
    run_dsum_experiment, run_is_vs_sxy, TreeExperimentConfig, VectorExperimentConfig,
};
use backhaul_core::milp::{build_node_model, certify_bundle, emit_lp, GlobalModel};
use backhaul_core::model::{load_tree, SlaParams, TreeTopology};
use backhaul_core::pinwheel::{
    brute_force_schedulable, is_schedule, sxy_schedule, BruteForceOutcome, CyclicSchedule,
    IsSolver, KVector,
};
use backhaul_core::rational::{decimal_string, parse_decimal, Rational};
use backhaul_core::sim::{simulate, ArrivalPattern};
use backhaul_core::symmetric::{
    greedy_prune, in_region, lambda_star, tau_star, SymmetricTreeSpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "backhaul", version, about = "SLA-guaranteeing schedules and admissions for tree backhaul networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pinwheel schedulability of an inter-scheduling vector.
    Pinwheel {
        #[command(subcommand)]
        command: PinwheelCommand,
    },
    /// Closed-form analysis of perfectly symmetric trees.
    Symmetric {
        #[command(subcommand)]
        command: SymmetricCommand,
    },
    /// Utility-maximizing admissions and schedules.
    Dsum {
        #[command(subcommand)]
        command: DsumCommand,
    },
    /// Mixed-integer model emission and certificate checking.
    Milp {
        #[command(subcommand)]
        command: MilpCommand,
    },
    /// Slot-level replay of a solution bundle.
    Simulate(SimulateArgs),
    /// Reproducible experiment drivers.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum PinwheelCommand {
    /// Decide schedulability of a comma-separated vector.
    Check(PinwheelCheckArgs),
}

#[derive(Args)]
struct PinwheelCheckArgs {
    /// Inter-scheduling times, e.g. 3,5,5,9,9.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Algo::Is)]
    algo: Algo,
    /// State cap for the oracle search.
    #[arg(long, default_value_t = 20_000_000)]
    state_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Sxy,
    Is,
    Oracle,
}

#[derive(Subcommand)]
enum SymmetricCommand {
    /// Optimal rate/deadline, region membership and greedy pruning.
    Analyze(SymmetricAnalyzeArgs),
}

#[derive(Args)]
struct SymmetricAnalyzeArgs {
    /// Branching factors per level, e.g. 5,5.
    #[arg(long, value_delimiter = ',', required = true)]
    branching: Vec<u64>,
    /// Per-level link capacities in packets per slot, e.g. 18,4.5.
    #[arg(long, value_delimiter = ',', required = true)]
    capacities: Vec<String>,
    /// Flow rate in packets per slot (decimal or fraction via num/den).
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long)]
    tau: u64,
}

#[derive(Subcommand)]
enum DsumCommand {
    /// Solve admissions for a tree document.
    Solve(DsumSolveArgs),
}

#[derive(Args)]
struct DsumSolveArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    tau: u64,
    /// Flow rate in packets per slot after normalization.
    #[arg(long, default_value = "1")]
    lambda: String,
    /// Worker threads (0 = default pool).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Solve with the round-robin + greedy-pruning baseline instead.
    #[arg(long)]
    baseline: Option<String>,
    /// Output file for the solution JSON (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MilpCommand {
    /// Emit the LP-format model for a tree (or a single node's block).
    Emit(MilpEmitArgs),
    /// Check a solution bundle against every model constraint family.
    Check(MilpCheckArgs),
}

#[derive(Args)]
struct MilpEmitArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    tau: u64,
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long)]
    out: PathBuf,
    /// Emit only this node's standalone block.
    #[arg(long)]
    node: Option<String>,
}

#[derive(Args)]
struct MilpCheckArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long, default_value = "1")]
    lambda: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    tau: u64,
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long, value_enum, default_value_t = Pattern::Saturating)]
    pattern: Pattern,
    #[arg(long, default_value_t = 5)]
    periods: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pattern {
    Saturating,
    Random,
    Burst,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Scheduler comparison over a random vector corpus.
    IsVsSxy(ExperimentArgs),
    /// Admission-solver study over random trees.
    Dsum(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_rational(text: &str) -> Result<Rational> {
    if let Some((num, den)) = text.split_once('/') {
        let num: i128 = num.trim().parse().context("numerator")?;
        let den: i128 = den.trim().parse().context("denominator")?;
        if den == 0 {
            bail!("zero denominator");
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(text).ok_or_else(|| anyhow!("cannot parse '{text}' as a number"))
}

fn slots_json(pi: &CyclicSchedule) -> serde_json::Value {
    serde_json::Value::Array(
        pi.slots()
            .iter()
            .map(|s| match s {
                Some(t) => serde_json::json!(format!("v{t}")),
                None => serde_json::Value::Null,
            })
            .collect(),
    )
}

fn load_tree_file(path: &PathBuf) -> Result<TreeTopology> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(load_tree(&text)?)
}

fn run_pinwheel(args: PinwheelCheckArgs) -> Result<i32> {
    let k = KVector::from_finite(&args.k);
    let (schedulable, schedule, trace, resource_limit) = match args.algo {
        Algo::Sxy => match sxy_schedule(&k) {
            Some((pi, witness)) => (true, Some(pi), serde_json::json!({ "witness": witness }), false),
            None => (false, None, serde_json::Value::Null, false),
        },
        Algo::Is => match is_schedule(&k) {
            Some((pi, trace)) => {
                let iters: Vec<serde_json::Value> = trace
                    .iterations
                    .iter()
                    .map(|it| {
                        serde_json::json!({
                            "j": it.j,
                            "k": it.k,
                            "removed": it.removed,
                            "schedulable_here": it.schedulable_here,
                        })
                    })
                    .collect();
                (true, Some(pi), serde_json::json!({ "iterations": iters, "witness": trace.witness }), false)
            }
            None => (false, None, serde_json::Value::Null, false),
        },
        Algo::Oracle => match brute_force_schedulable(&k, args.state_cap) {
            BruteForceOutcome::Schedulable(pi) => (true, Some(pi), serde_json::Value::Null, false),
            BruteForceOutcome::Unschedulable => (false, None, serde_json::Value::Null, false),
            BruteForceOutcome::ResourceLimit => (false, None, serde_json::Value::Null, true),
        },
    };
    let out = serde_json::json!({
        "k": args.k,
        "schedulable": schedulable,
        "period": schedule.as_ref().map(|pi| pi.period()),
        "slots": schedule.as_ref().map(slots_json),
        "trace": trace,
        "resource_limit": resource_limit,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if resource_limit {
        2
    } else if schedulable {
        0
    } else {
        1
    })
}

fn run_symmetric(args: SymmetricAnalyzeArgs) -> Result<i32> {
    let capacities: Result<Vec<Rational>> =
        args.capacities.iter().map(|c| parse_rational(c)).collect();
    let spec = SymmetricTreeSpec::new(args.branching.clone(), capacities?);
    let lambda = parse_rational(&args.lambda)?;
    let ls = lambda_star(&spec);
    let ts = tau_star(&spec);
    let member = in_region(&spec, lambda, args.tau);
    let prune = greedy_prune(&spec, args.tau);
    let (pruned, log) = match &prune {
        Ok((p, l)) => (Some(p), l.clone()),
        Err(_) => (None, Vec::new()),
    };
    let out = serde_json::json!({
        "lambda_star": { "num": ls.numer().to_string(), "den": ls.denom().to_string(),
                         "decimal": decimal_string(ls, 6) },
        "tau_star": ts,
        "in_region": member,
        "prune_log": log,
        "pruned_branching": pruned.map(|p| p.branching.clone()),
        "pruned_flows": pruned.map(|p| p.total_flows()),
        "urr_k": args.branching,
        "prune_error": prune.as_ref().err().map(|e| e.to_string()),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn run_dsum_solve(args: DsumSolveArgs) -> Result<i32> {
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(args.threads).build_global().ok();
    }
    let tree = load_tree_file(&args.tree)?;
    let lambda = parse_rational(&args.lambda)?;
    let sla = SlaParams::new(lambda, args.tau);
    let (bundle, stats) = match args.baseline.as_deref() {
        Some("urr") => (urr_baseline(&tree, &sla), Default::default()),
        Some(other) => bail!("unknown baseline '{other}' (expected 'urr')"),
        None => {
            let solver = IsSolver::new();
            dsum_with_stats(&tree, &sla, &solver)
        }
    };
    let json = bundle_to_json(&bundle, &tree);
    match &args.out {
        Some(path) => std::fs::write(path, &json)?,
        None => println!("{json}"),
    }
    eprintln!(
        "sigma = {} of {} flows (tau = {}, lambda = {}); solve {:.1} ms, distributed {:.1} ms",
        bundle.sigma,
        tree.total_flows(),
        args.tau,
        decimal_string(lambda, 6),
        stats.total_ms,
        stats.distributed_ms,
    );
    for (ap, count) in &bundle.admissions {
        eprintln!("  {}: {} admitted", tree.node(*ap).name, count);
    }
    Ok(0)
}

fn run_milp(command: MilpCommand) -> Result<i32> {
    match command {
        MilpCommand::Emit(args) => {
            let tree = load_tree_file(&args.tree)?;
            let lambda = parse_rational(&args.lambda)?;
            let sla = SlaParams::new(lambda, args.tau);
            let text = match &args.node {
                Some(name) => {
                    let id = tree
                        .find(name)
                        .ok_or_else(|| anyhow!("node '{name}' not found"))?;
                    let node = tree.node(id);
                    let caps: Vec<Rational> = if node.children.is_empty() {
                        vec![
                            node.flow_capacity
                                .ok_or_else(|| anyhow!("node '{name}' has no customer links"))?;
                            node.flows as usize
                        ]
                    } else {
                        node.children
                            .iter()
                            .map(|&c| tree.node(c).capacity.expect("non-root"))
                            .collect()
                    };
                    let (model, _) = build_node_model(&caps, lambda, sla.tau.max(1));
                    emit_lp(&model)?
                }
                None => {
                    let gm: GlobalModel =
                        backhaul_core::milp::build_global_model(&tree, &sla, sla.tau.max(1));
                    emit_lp(&gm.model)?
                }
            };
            std::fs::write(&args.out, text)?;
            eprintln!("wrote {}", args.out.display());
            Ok(0)
        }
        MilpCommand::Check(args) => {
            let tree = load_tree_file(&args.tree)?;
            let text = std::fs::read_to_string(&args.solution)?;
            let mut bundle = bundle_from_json(&text, &tree).map_err(|e| anyhow!(e))?;
            let lambda = parse_rational(&args.lambda)?;
            let sla = SlaParams::new(lambda, bundle.tau);
            // interchange documents carry no traces; rebuild them
            let solver = IsSolver::new();
            for id in 0..tree.len() {
                if bundle.node_schedules[id].is_none() {
                    continue;
                }
                let node = tree.node(id);
                let kv = if node.children.is_empty() {
                    let n = bundle.admissions.get(&id).copied().unwrap_or(0);
                    KVector::from_finite(&vec![n; n as usize])
                } else {
                    KVector::from_entries(
                        node.children.iter().map(|&c| bundle.link_k[c]).collect(),
                    )
                };
                bundle.traces[id] = solver.is_schedule(&kv).map(|(_, trace)| trace);
            }
            let report = certify_bundle(&tree, &sla, &bundle);
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

fn run_simulate(args: SimulateArgs) -> Result<i32> {
    let tree = load_tree_file(&args.tree)?;
    let text = std::fs::read_to_string(&args.solution)?;
    let bundle = bundle_from_json(&text, &tree).map_err(|e| anyhow!(e))?;
    let lambda = parse_rational(&args.lambda)?;
    let sla = SlaParams::new(lambda, args.tau);
    let pattern = match args.pattern {
        Pattern::Saturating => ArrivalPattern::Saturating,
        Pattern::Random => ArrivalPattern::Random { seed: args.seed },
        Pattern::Burst => ArrivalPattern::SingleBurst,
    };
    let report = simulate(&bundle, &tree, &sla, pattern, args.periods)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.violations == 0 { 0 } else { 1 })
}

fn run_experiment(command: ExperimentCommand) -> Result<i32> {
    match command {
        ExperimentCommand::IsVsSxy(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let config: VectorExperimentConfig = serde_json::from_str(&text)?;
            let rows = run_is_vs_sxy(&config, &args.out)?;
            for row in &rows {
                eprintln!(
                    "M={}: n={} sxy={} is={}{}",
                    row.m,
                    row.n,
                    row.sxy_success,
                    row.is_success,
                    if row.truncated { " (truncated)" } else { "" }
                );
            }
            Ok(0)
        }
        ExperimentCommand::Dsum(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let config: TreeExperimentConfig = serde_json::from_str(&text)?;
            let rows = run_dsum_experiment(&config, &args.out)?;
            for row in &rows {
                eprintln!(
                    "seed={} tau={}: dsum={} urr={} bound={}",
                    row.seed_index, row.tau, row.sigma_dsum, row.sigma_urr, row.capacity_bound
                );
            }
            Ok(0)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pinwheel { command: PinwheelCommand::Check(args) } => run_pinwheel(args),
        Command::Symmetric { command: SymmetricCommand::Analyze(args) } => run_symmetric(args),
        Command::Dsum { command: DsumCommand::Solve(args) } => run_dsum_solve(args),
        Command::Milp { command } => run_milp(command),
        Command::Simulate(args) => run_simulate(args),
        Command::Experiment { command } => run_experiment(command),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(64);
        }
    }
}
