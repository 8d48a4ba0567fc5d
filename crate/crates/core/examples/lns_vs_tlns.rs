//! Plain LNS against two-layer LNS on set-cover instances under an equal
//! budget of exact sub-solves. Primal integrals are reported on two clocks:
//! wall seconds (horizon: the longer run) and sub-solve count (horizon: the
//! budget).
//!
//! cargo run --release --example lns_vs_tlns -- [instances] [budget]

use tlns::bench::primal_integral_of;
use tlns::engine::{initial_solution, run_lns, run_tlns, ClockMode, LnsParams, RandomFixer};
use tlns::generators::{generate, GenSpec};
use tlns::rng::{stream_rng, streams};

fn main() -> tlns::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: u64 = args
        .next()
        .map_or(3, |s| s.parse().expect("instance count"));
    let budget: f64 = args.next().map_or(300.0, |s| s.parse().expect("budget"));
    let params = |r: usize, eta: f64| LnsParams {
        count_limit: 4,
        clock: ClockMode::Iterations,
        sub_node_limit: Some(500),
        ..LnsParams::new(r, eta, budget)
    };
    let mut sums = [0.0f64; 4];
    for seed in 0..count {
        let inst = generate(&GenSpec::Sc {
            n_items: 2500,
            n_subsets: 2000,
            density: 0.05,
            seed,
        })?;
        let x0 = initial_solution(&inst, None, 60.0)?;
        let mut rng = stream_rng(seed, streams::ENGINE);
        let (a, log_a) = run_lns(&inst, &x0, &mut RandomFixer, &params(100, 1.05), &mut rng)?;
        let mut rng = stream_rng(seed, streams::ENGINE);
        let (b, log_b) = run_tlns(
            &inst,
            &x0,
            &mut RandomFixer,
            &params(1000, 1.05),
            &params(100, 1.15),
            &mut rng,
        )?;
        let bks = a.objective.min(b.objective);
        let horizon = log_a.wall_duration().max(log_b.wall_duration());
        let wall_a = primal_integral_of(&log_a.pb_wall_trajectory(), bks, horizon)?;
        let wall_b = primal_integral_of(&log_b.pb_wall_trajectory(), bks, horizon)?;
        let ticks_a = primal_integral_of(&log_a.pb_trajectory(), bks, budget)?;
        let ticks_b = primal_integral_of(&log_b.pb_trajectory(), bks, budget)?;
        println!(
            "{}: LNS {} in {:.2}s, {} sub-solves  TLNS {} in {:.2}s, {} sub-solves",
            inst.name(),
            a.objective,
            log_a.wall_duration(),
            log_a.sub_solves,
            b.objective,
            log_b.wall_duration(),
            log_b.sub_solves,
        );
        println!(
            "  PI wall: LNS {wall_a:.4} TLNS {wall_b:.4}  PI sub-solves: LNS {ticks_a:.2} TLNS {ticks_b:.2}"
        );
        sums[0] += wall_a;
        sums[1] += wall_b;
        sums[2] += ticks_a;
        sums[3] += ticks_b;
    }
    let k = count as f64;
    println!(
        "mean PI wall: LNS {:.4} TLNS {:.4}  sub-solves: LNS {:.2} TLNS {:.2}",
        sums[0] / k,
        sums[1] / k,
        sums[2] / k,
        sums[3] / k
    );
    Ok(())
}
