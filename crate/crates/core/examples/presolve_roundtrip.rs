//! Fixes a random subset of variables at the incumbent, presolves the
//! resulting sub-problem, solves it, and lifts the answer back.
//!
//! cargo run --example presolve_roundtrip

use tlns::bnb::{solve_milp, SolveOptions};
use tlns::engine::initial_solution;
use tlns::generators::{generate, GenSpec};
use tlns::milp::{check_feasibility, FEAS_TOL};
use tlns::neighborhoods::random_unfix;
use tlns::presolve::{postsolve, presolve_fixing};
use tlns::rng::{stream_rng, streams};

fn main() -> tlns::error::Result<()> {
    let inst = generate(&GenSpec::Sc {
        n_items: 600,
        n_subsets: 500,
        density: 0.05,
        seed: 1,
    })?;
    let incumbent = initial_solution(&inst, None, 10.0)?;
    let mut rng = stream_rng(0, streams::ENGINE);
    let fixing = random_unfix(&inst, 120, &mut rng)?;

    let (reduced, start, map) = presolve_fixing(&inst, &incumbent, &fixing)?;
    println!(
        "original n = {} m = {}; reduced n = {} m = {}; offset {}",
        inst.n(),
        inst.m(),
        reduced.n(),
        reduced.m(),
        map.objective_offset
    );
    let lifted_start = postsolve(&reduced, &start, &map)?;
    assert_eq!(lifted_start.x, incumbent.x);

    let res = solve_milp(&reduced, &SolveOptions::with_time_limit(10.0))?;
    let y = res.best.expect("the restricted incumbent is feasible");
    let x = postsolve(&reduced, &y, &map)?;
    assert!(check_feasibility(&inst, &x.x, FEAS_TOL)?.feasible);
    println!(
        "incumbent {} -> sub-problem optimum {} (lifted)",
        incumbent.objective, x.objective
    );
    Ok(())
}
