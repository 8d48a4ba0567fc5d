//! Collects local-branching expert samples (positives and negatives) on
//! small independent-set instances and writes them as JSON lines.
//!
//! cargo run --release --example collect_lb -- [out.jsonl]

use tlns::collect::{collect_lb_trajectory, read_dataset, write_dataset, CollectParams};
use tlns::generators::{generate, GenSpec};
use tlns::rng::{stream_rng, streams};

fn main() -> tlns::error::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "lb-samples.jsonl".into());
    let mut params = CollectParams::new(15, 5.0);
    params.negatives = 4;
    params.max_steps = 5;
    let mut records = Vec::new();
    for seed in 0..2 {
        let inst = generate(&GenSpec::Mis {
            n_nodes: 80,
            avg_degree: 4.0,
            seed,
        })?;
        let mut rng = stream_rng(seed, streams::COLLECT);
        let recs = collect_lb_trajectory(&inst, inst.name(), &params, &mut rng)?;
        for r in &recs {
            println!(
                "{}: |a*| = {}, {} positives, {} negatives",
                r.instance,
                r.positives[0].len(),
                r.positives.len(),
                r.negatives.len()
            );
        }
        records.extend(recs);
    }
    write_dataset(&records, &out)?;
    assert_eq!(read_dataset(&out)?, records);
    println!("{} records -> {out}", records.len());
    Ok(())
}
