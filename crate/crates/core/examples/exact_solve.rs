//! Solves a small vertex-cover instance with the built-in branch and bound and
//! checks the optimum against exhaustive enumeration.
//!
//! cargo run --example exact_solve

use tlns::bnb::{solve_milp, SolveOptions};
use tlns::generators::{generate, GenSpec};
use tlns::milp::{check_feasibility, evaluate_objective, FEAS_TOL};

fn main() -> tlns::error::Result<()> {
    let inst = generate(&GenSpec::Mvc {
        n_nodes: 18,
        avg_degree: 3.0,
        seed: 3,
    })?;
    let res = solve_milp(&inst, &SolveOptions::with_time_limit(10.0))?;
    let best = res.best.expect("vertex cover is always feasible");
    println!(
        "{:?}: objective {} after {} nodes, {} LP iterations",
        res.status, best.objective, res.nodes, res.lp_iterations
    );

    let n = inst.n();
    let mut brute = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
        if check_feasibility(&inst, &x, FEAS_TOL)?.feasible {
            brute = brute.min(evaluate_objective(&inst, &x)?);
        }
    }
    println!("enumeration optimum {brute}");
    assert_eq!(brute, best.objective);
    Ok(())
}
