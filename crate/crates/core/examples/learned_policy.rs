//! Scores variables with the graph-transformer policy and drives LNS with it.
//! Weights come from an sgtw-1 file when given, otherwise a random
//! initialization is written to `policy.sgtw` first.
//!
//! cargo run --release --example learned_policy -- [weights.sgtw]

use std::sync::Arc;

use tlns::engine::{initial_solution, run_lns, LearnedFixer, LnsParams};
use tlns::generators::{generate, GenSpec};
use tlns::policy::{extract_features, load_weights, save_weights, sgt_forward, SgtWeights};
use tlns::rng::{stream_rng, streams};

fn main() -> tlns::error::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p,
        None => {
            let w = SgtWeights::random(32, 0.5, 0.5, &mut stream_rng(0, streams::WEIGHTS));
            save_weights(&w, "policy.sgtw")?;
            "policy.sgtw".into()
        }
    };
    let weights = Arc::new(load_weights(&path)?);
    let inst = generate(&GenSpec::Mvc {
        n_nodes: 400,
        avg_degree: 5.0,
        seed: 2,
    })?;
    let x0 = initial_solution(&inst, None, 10.0)?;

    let scores = sgt_forward(&extract_features(&inst, &x0)?, &weights)?;
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
            (a.min(s), b.max(s))
        });
    println!("{} scores in [{lo:.4}, {hi:.4}]", scores.len());

    let mut fixer = LearnedFixer::new(weights)?;
    let mut rng = stream_rng(0, streams::ENGINE);
    let params = LnsParams::new(60, 1.05, 10.0);
    let (best, log) = run_lns(&inst, &x0, &mut fixer, &params, &mut rng)?;
    println!(
        "L-LNS: {} -> {} in {} iterations (policy {:.3}s, sub-solve {:.3}s)",
        x0.objective,
        best.objective,
        log.iterations,
        log.phase_times.policy,
        log.phase_times.sub_solve
    );
    Ok(())
}
