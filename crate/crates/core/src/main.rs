use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tlns::bench::{run_benchmark, BenchConfig};
use tlns::collect::{collect_dataset, write_dataset, CollectParams};
use tlns::engine::{
    initial_solution, run_lns, run_tlns, FixingHeuristic, LearnedFixer, LnsParams, RandomFixer,
    RunLog, DEFAULT_COUNT_LIMIT, DEFAULT_ETA_INNER, DEFAULT_ETA_OUTER, DEFAULT_SUB_TIME_LIMIT,
};
use tlns::error::{Error, Result};
use tlns::generators::{generate, Family, GenSpec};
use tlns::milp::{read_instance, write_instance, MilpInstance, Solution};
use tlns::policy::load_weights;
use tlns::rng::{stream_rng, streams};

#[derive(Parser)]
#[command(
    name = "tlns",
    version,
    about = "LNS and two-layer LNS for binary MILPs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark instance.
    Gen(GenArgs),
    /// Run plain LNS on an instance.
    Lns(RunArgs),
    /// Run two-layer LNS on an instance.
    Tlns(RunArgs),
    /// Collect local-branching training data.
    Collect(CollectArgs),
    /// Run a benchmark described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    /// SC and CA: number of items.
    #[arg(long)]
    items: Option<usize>,
    /// SC: number of subsets.
    #[arg(long)]
    subsets: Option<usize>,
    /// SC: membership probability.
    #[arg(long, default_value_t = 0.05)]
    density: f64,
    /// CA: number of bids.
    #[arg(long)]
    bids: Option<usize>,
    /// CA: largest bundle size.
    #[arg(long, default_value_t = 5)]
    max_bundle: usize,
    /// MIS and MVC: number of nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// MIS and MVC: expected degree.
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Random,
    Learned,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Policy::Random)]
    policy: Policy,
    /// sgtw-1 weights, required for the learned policy.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Unfix count (plain LNS).
    #[arg(long, default_value_t = 100)]
    r: usize,
    /// Outer unfix count (two-layer LNS).
    #[arg(long, default_value_t = 1000)]
    r1: usize,
    /// Inner unfix count (two-layer LNS).
    #[arg(long, default_value_t = 100)]
    r2: usize,
    #[arg(long, default_value_t = DEFAULT_ETA_OUTER)]
    eta1: f64,
    #[arg(long, default_value_t = DEFAULT_ETA_INNER)]
    eta2: f64,
    /// Defaults to the family's tuned value when the instance name reveals it.
    #[arg(long)]
    count_limit: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SUB_TIME_LIMIT)]
    sub_time_limit: f64,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Seconds allowed for finding the starting incumbent.
    #[arg(long, default_value_t = 60.0)]
    initial_time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Event log destination (JSON lines).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct CollectArgs {
    /// Instance files (tlns-1 JSON).
    #[arg(long, required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    /// LB radius; defaults to the family value of the first instance.
    #[arg(long)]
    lb_k: Option<usize>,
    #[arg(long, default_value_t = 60.0)]
    lb_time_limit: f64,
    #[arg(long, default_value_t = tlns::collect::DEFAULT_KAPPA_P)]
    kappa_p: f64,
    #[arg(long, default_value_t = tlns::collect::DEFAULT_KAPPA_N)]
    kappa_n: f64,
    #[arg(long, default_value_t = tlns::collect::DEFAULT_NEGATIVES)]
    negatives: usize,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Lns(a) => run(a, false),
        Cmd::Tlns(a) => run(a, true),
        Cmd::Collect(a) => collect(a),
        Cmd::Bench { config } => bench(config),
    }
}

fn required(v: Option<usize>, flag: &str, family: Family) -> Result<usize> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required for {family}")))
}

fn gen(a: GenArgs) -> Result<()> {
    let spec = match a.family {
        Family::Sc => GenSpec::Sc {
            n_items: required(a.items, "items", a.family)?,
            n_subsets: required(a.subsets, "subsets", a.family)?,
            density: a.density,
            seed: a.seed,
        },
        Family::Ca => GenSpec::Ca {
            n_bids: required(a.bids, "bids", a.family)?,
            n_items: required(a.items, "items", a.family)?,
            max_bundle: a.max_bundle,
            seed: a.seed,
        },
        Family::Mis => GenSpec::Mis {
            n_nodes: required(a.nodes, "nodes", a.family)?,
            avg_degree: a.avg_degree,
            seed: a.seed,
        },
        Family::Mvc => GenSpec::Mvc {
            n_nodes: required(a.nodes, "nodes", a.family)?,
            avg_degree: a.avg_degree,
            seed: a.seed,
        },
    };
    let inst = generate(&spec)?;
    write_instance(&inst, &a.out)?;
    println!(
        "{}: n = {}, m = {}, nnz = {} -> {}",
        inst.name(),
        inst.n(),
        inst.m(),
        inst.nnz(),
        a.out.display()
    );
    Ok(())
}

fn fixer(a: &RunArgs) -> Result<Box<dyn FixingHeuristic>> {
    Ok(match a.policy {
        Policy::Random => Box::new(RandomFixer),
        Policy::Learned => {
            let path = a.weights.as_ref().ok_or_else(|| {
                Error::InvalidArgument("--weights is required for the learned policy".into())
            })?;
            Box::new(LearnedFixer::new(Arc::new(load_weights(path)?))?)
        }
    })
}

fn run(a: RunArgs, two_layer: bool) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let family = Family::from_instance_name(inst.name());
    let count_limit = a
        .count_limit
        .unwrap_or_else(|| family.map_or(DEFAULT_COUNT_LIMIT, Family::default_count_limit));
    let x0 = initial_solution(&inst, family, a.initial_time_limit)?;
    let mut fixer = fixer(&a)?;
    let mut rng = stream_rng(a.seed, streams::ENGINE);
    let params = |r: usize, eta: f64| LnsParams {
        count_limit,
        sub_time_limit: a.sub_time_limit,
        ..LnsParams::new(r, eta, a.time_limit)
    };
    let (best, log) = if two_layer {
        run_tlns(
            &inst,
            &x0,
            fixer.as_mut(),
            &params(a.r1, a.eta1),
            &params(a.r2, a.eta2),
            &mut rng,
        )?
    } else {
        run_lns(&inst, &x0, fixer.as_mut(), &params(a.r, a.eta1), &mut rng)?
    };
    report(&inst, &x0, &best, &log);
    if let Some(path) = &a.log {
        log.write_jsonl(path)?;
    }
    Ok(())
}

fn report(inst: &MilpInstance, x0: &Solution, best: &Solution, log: &RunLog) {
    let p = &log.phase_times;
    println!("instance      {}", inst.name());
    println!("start         {}", x0.objective);
    println!("best          {}", best.objective);
    println!("incumbents    {}", log.incumbents().count());
    println!("iterations    {}", log.iterations);
    println!("sub-solves    {}", log.sub_solves);
    println!("presolves     {}", log.presolve_calls);
    println!(
        "phase seconds presolve {:.3}  sub-solve {:.3}  policy {:.3}  postsolve {:.3}  overhead {:.3}",
        p.presolve, p.sub_solve, p.policy, p.postsolve, p.overhead
    );
}

fn collect(a: CollectArgs) -> Result<()> {
    let lb_k = match a.lb_k {
        Some(k) => k,
        None => {
            let inst = read_instance(&a.instances[0])?;
            Family::from_instance_name(inst.name())
                .map(Family::default_lb_radius)
                .ok_or_else(|| {
                    Error::InvalidArgument("--lb-k is required for this instance".into())
                })?
        }
    };
    let mut params = CollectParams::new(lb_k, a.lb_time_limit);
    params.kappa_p = a.kappa_p;
    params.kappa_n = a.kappa_n;
    params.negatives = a.negatives;
    if let Some(s) = a.max_steps {
        params.max_steps = s;
    }
    params.validate()?;
    let (records, failures) = collect_dataset(&a.instances, &params, a.seed);
    for (path, e) in &failures {
        eprintln!("skipped {}: {e}", path.display());
    }
    write_dataset(&records, &a.out)?;
    println!("{} records -> {}", records.len(), a.out.display());
    Ok(())
}

fn bench(config: PathBuf) -> Result<()> {
    let config = BenchConfig::load(&config)?;
    let report = run_benchmark(&config)?;
    for (key, e) in &report.failures {
        eprintln!("failed {key}: {e}");
    }
    for (method, pi) in report.mean_pi() {
        println!("{method:<16} mean PI {pi:.6}");
    }
    println!("results -> {}", report.csv_path.display());
    Ok(())
}
