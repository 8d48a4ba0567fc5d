//! Large neighborhood search (LNS) and two-layer LNS for binary MILPs.
//!
//! The crate bundles everything an LNS run needs: a sparse MILP model with
//! JSON instance files, seeded benchmark generators, a bounded-variable
//! simplex and a branch-and-bound solver for the sub-problems, a reversible
//! presolve, random and learned (graph transformer) fixing heuristics, the
//! LNS / TLNS engines, local-branching data collection for training, and a
//! benchmark harness that reports primal bounds and primal integrals.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod bench;
pub mod bnb;
pub mod collect;
pub mod engine;
pub mod error;
pub mod external;
pub mod generators;
pub mod lp;
pub mod milp;
pub mod neighborhoods;
pub mod policy;
pub mod presolve;
pub mod rng;

pub use error::{Error, Result};
pub use milp::{MilpBuilder, MilpInstance, Sense, Solution};
