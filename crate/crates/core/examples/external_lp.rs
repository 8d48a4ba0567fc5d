//! Writes an instance in LP format for an external solver and, when the
//! command is available, solves it through the adapter.
//!
//! cargo run --example external_lp -- [command template]
//!
//! The template may use `{lp}`, `{sol}` and `{time}`; it defaults to a
//! Gurobi command line.

use tlns::bnb::SolveOptions;
use tlns::error::Error;
use tlns::external::{external_solve, write_lp, DEFAULT_COMMAND};
use tlns::generators::{generate, GenSpec};

fn main() -> tlns::error::Result<()> {
    let command = std::env::args()
        .nth(1)
        .unwrap_or_else(|| DEFAULT_COMMAND.into());
    let inst = generate(&GenSpec::Ca {
        n_bids: 60,
        n_items: 20,
        max_bundle: 4,
        seed: 0,
    })?;
    let lp = write_lp(&inst);
    std::fs::write("auction.lp", &lp)?;
    println!("wrote auction.lp ({} lines)", lp.lines().count());
    match external_solve(&inst, &SolveOptions::with_time_limit(30.0), &command) {
        Ok(res) => println!("{:?}: {:?}", res.status, res.best.map(|b| b.objective)),
        Err(Error::AdapterUnavailable(msg)) => println!("adapter unavailable: {msg}"),
        Err(e) => return Err(e),
    }
    Ok(())
}
