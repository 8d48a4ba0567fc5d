//! Generates one instance per family, writes it as tlns-1 JSON and reads it back.
//!
//! cargo run --example generate_instances -- [out_dir]

use tlns::generators::{generate, GenSpec};
use tlns::milp::{read_instance, write_instance};

fn main() -> tlns::error::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "instances".into());
    std::fs::create_dir_all(&out)?;
    let specs = [
        GenSpec::Sc {
            n_items: 500,
            n_subsets: 400,
            density: 0.05,
            seed: 0,
        },
        GenSpec::Ca {
            n_bids: 400,
            n_items: 100,
            max_bundle: 5,
            seed: 0,
        },
        GenSpec::Mis {
            n_nodes: 300,
            avg_degree: 4.0,
            seed: 0,
        },
        GenSpec::Mvc {
            n_nodes: 300,
            avg_degree: 4.0,
            seed: 0,
        },
    ];
    for spec in &specs {
        let inst = generate(spec)?;
        let path = format!("{out}/{}.json", inst.name());
        write_instance(&inst, &path)?;
        let back = read_instance(&path)?;
        assert_eq!(back.n(), inst.n());
        println!(
            "{:<40} n = {:>4}  m = {:>5}  nnz = {:>6}",
            inst.name(),
            inst.n(),
            inst.m(),
            inst.nnz()
        );
    }
    Ok(())
}
