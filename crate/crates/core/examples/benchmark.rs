//! Runs a small benchmark grid (instances x methods x seeds) and writes
//! results.csv, per-run JSONL logs and primal-bound plots.
//!
//! cargo run --release --example benchmark -- [out_dir]

use tlns::bench::{run_benchmark, BenchConfig};
use tlns::generators::{generate, GenSpec};
use tlns::milp::write_instance;

fn main() -> tlns::error::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "bench-out".into());
    std::fs::create_dir_all(format!("{out}/instances"))?;
    let mut instances = Vec::new();
    for seed in 0..2 {
        let inst = generate(&GenSpec::Sc {
            n_items: 1200,
            n_subsets: 1000,
            density: 0.05,
            seed,
        })?;
        let path = format!("{out}/instances/{}.json", inst.name());
        write_instance(&inst, &path)?;
        instances.push(path);
    }
    let config = serde_json::json!({
        "instances": instances,
        "methods": [
            {"name": "R-LNS", "engine": "lns", "policy": "random", "r": 100, "count_limit": 4, "sub_node_limit": 500},
            {"name": "R-TLNS", "engine": "tlns", "policy": "random", "r": 600, "r2": 100, "count_limit": 4, "sub_node_limit": 500}
        ],
        "time_limit": 150,
        "seeds": [0, 1],
        "bks": {"policy": "computed", "extended_factor": 2.0},
        "clock": "iterations",
        "out_dir": out
    });
    let config = BenchConfig::from_json(&config.to_string())?;
    let report = run_benchmark(&config)?;
    for (method, pi) in report.mean_pi() {
        println!("{method:<8} mean PI {pi:.3}");
    }
    println!("results -> {}", report.csv_path.display());
    Ok(())
}
