//! Seeded generators for the four benchmark families: set cover (SC),
//! combinatorial auction (CA), maximum independent set (MIS) and minimum
//! vertex cover (MVC). All produce pure-binary minimization problems.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{MilpBuilder, MilpInstance, Sense};
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sc,
    Ca,
    Mis,
    Mvc,
}

impl Family {
    /// Recovers the family from a generated instance name (`sc-...`, `ca-...`).
    pub fn from_instance_name(name: &str) -> Option<Self> {
        let prefix = name.split(['-', '_']).next()?;
        prefix.parse().ok()
    }

    /// Count limit `C` tuned per family for the inner LNS layer.
    pub fn default_count_limit(self) -> usize {
        match self {
            Family::Sc => 6,
            Family::Ca => 3,
            Family::Mis => 4,
            Family::Mvc => 4,
        }
    }

    /// Local-branching radius used by the expert on the reference-size instances.
    pub fn default_lb_radius(self) -> usize {
        match self {
            Family::Sc => 100,
            Family::Ca => 400,
            Family::Mis => 500,
            Family::Mvc => 75,
        }
    }

    /// Trivially feasible assignment: every set or vertex chosen for the
    /// covering families, nothing chosen for the packing ones.
    pub fn trivial_solution(self, n: usize) -> Vec<f64> {
        match self {
            Family::Sc | Family::Mvc => vec![1.0; n],
            Family::Ca | Family::Mis => vec![0.0; n],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sc => "sc",
            Family::Ca => "ca",
            Family::Mis => "mis",
            Family::Mvc => "mvc",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Family::Sc),
            "ca" => Ok(Family::Ca),
            "mis" => Ok(Family::Mis),
            "mvc" => Ok(Family::Mvc),
            other => Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

/// Generator parameters. Every generator is a pure function of this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GenSpec {
    Sc {
        n_items: usize,
        n_subsets: usize,
        density: f64,
        seed: u64,
    },
    Ca {
        n_bids: usize,
        n_items: usize,
        max_bundle: usize,
        seed: u64,
    },
    Mis {
        n_nodes: usize,
        avg_degree: f64,
        seed: u64,
    },
    Mvc {
        n_nodes: usize,
        avg_degree: f64,
        seed: u64,
    },
}

impl GenSpec {
    pub fn family(&self) -> Family {
        match self {
            GenSpec::Sc { .. } => Family::Sc,
            GenSpec::Ca { .. } => Family::Ca,
            GenSpec::Mis { .. } => Family::Mis,
            GenSpec::Mvc { .. } => Family::Mvc,
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            GenSpec::Sc { seed, .. }
            | GenSpec::Ca { seed, .. }
            | GenSpec::Mis { seed, .. }
            | GenSpec::Mvc { seed, .. } => seed,
        }
    }

    /// Same sizes, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            GenSpec::Sc { seed: s, .. }
            | GenSpec::Ca { seed: s, .. }
            | GenSpec::Mis { seed: s, .. }
            | GenSpec::Mvc { seed: s, .. } => *s = seed,
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            GenSpec::Sc {
                n_items,
                n_subsets,
                density,
                ..
            } => {
                if n_items == 0 || n_subsets == 0 {
                    return bad("set cover needs at least one item and one subset".into());
                }
                if !(density > 0.0 && density <= 1.0) {
                    return bad(format!("density {density} must lie in (0, 1]"));
                }
            }
            GenSpec::Ca {
                n_bids,
                n_items,
                max_bundle,
                ..
            } => {
                if n_bids == 0 || n_items == 0 || max_bundle == 0 {
                    return bad("auction counts must all be >= 1".into());
                }
            }
            GenSpec::Mis {
                n_nodes,
                avg_degree,
                ..
            }
            | GenSpec::Mvc {
                n_nodes,
                avg_degree,
                ..
            } => {
                if n_nodes == 0 {
                    return bad("graph needs at least one node".into());
                }
                if !(avg_degree >= 0.0 && avg_degree < n_nodes as f64) {
                    return bad(format!(
                        "average degree {avg_degree} must lie in [0, {n_nodes})"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Canonical instance name, prefixed by the family tag.
    pub fn instance_name(&self) -> String {
        match *self {
            GenSpec::Sc {
                n_items,
                n_subsets,
                density,
                seed,
            } => format!("sc-i{n_items}-s{n_subsets}-d{density}-seed{seed}"),
            GenSpec::Ca {
                n_bids,
                n_items,
                max_bundle,
                seed,
            } => format!("ca-b{n_bids}-i{n_items}-k{max_bundle}-seed{seed}"),
            GenSpec::Mis {
                n_nodes,
                avg_degree,
                seed,
            } => format!("mis-n{n_nodes}-d{avg_degree}-seed{seed}"),
            GenSpec::Mvc {
                n_nodes,
                avg_degree,
                seed,
            } => format!("mvc-n{n_nodes}-d{avg_degree}-seed{seed}"),
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<MilpInstance> {
    match spec.family() {
        Family::Sc => gen_set_cover(spec),
        Family::Ca => gen_comb_auction(spec),
        Family::Mis => gen_mis(spec),
        Family::Mvc => gen_mvc(spec),
    }
}

fn wrong_family(expected: Family, spec: &GenSpec) -> Error {
    Error::InvalidArgument(format!("expected a {expected} spec, got {}", spec.family()))
}

/// Set cover: one binary per subset with unit cost and one `>= 1` row per
/// item. Membership is Bernoulli(`density`) per (item, subset) pair; items
/// left with fewer than two subsets get random extra subsets.
pub fn gen_set_cover(spec: &GenSpec) -> Result<MilpInstance> {
    let GenSpec::Sc {
        n_items,
        n_subsets,
        density,
        seed,
    } = *spec
    else {
        return Err(wrong_family(Family::Sc, spec));
    };
    spec.validate()?;
    if n_subsets < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot cover every item twice with {n_subsets} subset(s)"
        )));
    }
    let mut rng = stream_rng(seed, streams::SET_COVER);
    let mut b = MilpBuilder::new(spec.instance_name());
    for _ in 0..n_subsets {
        b.add_binary(1.0);
    }
    for _ in 0..n_items {
        let mut members: Vec<usize> = (0..n_subsets).filter(|_| rng.gen_bool(density)).collect();
        while members.len() < 2 {
            let s = rng.gen_range(0..n_subsets);
            if let Err(pos) = members.binary_search(&s) {
                members.insert(pos, s);
            }
        }
        b.add_row(
            members.into_iter().map(|s| (s, 1.0)).collect(),
            Sense::Ge,
            1.0,
        );
    }
    b.build()
}

/// Combinatorial auction: one binary per bid with cost `-price`, and one
/// `<= 1` row per item that appears in at least one bundle. Bundle sizes are
/// uniform on `{2, .., max_bundle}` (capped by the item count), bundles are
/// uniform subsets, and `price = |bundle| * (1 + U[0, 1))`.
pub fn gen_comb_auction(spec: &GenSpec) -> Result<MilpInstance> {
    let GenSpec::Ca {
        n_bids,
        n_items,
        max_bundle,
        seed,
    } = *spec
    else {
        return Err(wrong_family(Family::Ca, spec));
    };
    spec.validate()?;
    let mut rng = stream_rng(seed, streams::COMB_AUCTION);
    let hi = max_bundle.min(n_items);
    let lo = 2.min(hi);
    let mut b = MilpBuilder::new(spec.instance_name());
    let mut bids_of_item: Vec<Vec<usize>> = vec![Vec::new(); n_items];
    for bid in 0..n_bids {
        let size = rng.gen_range(lo..=hi);
        let mut bundle = index::sample(&mut rng, n_items, size).into_vec();
        bundle.sort_unstable();
        let price = size as f64 * (1.0 + rng.gen::<f64>());
        b.add_binary(-price);
        for item in bundle {
            bids_of_item[item].push(bid);
        }
    }
    for bids in bids_of_item.into_iter().filter(|bids| !bids.is_empty()) {
        b.add_row(bids.into_iter().map(|i| (i, 1.0)).collect(), Sense::Le, 1.0);
    }
    b.build()
}

/// Erdős–Rényi edge list with `p = avg_degree / (n - 1)`, pairs visited in
/// lexicographic order.
pub fn er_graph(n_nodes: usize, avg_degree: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = stream_rng(seed, streams::GRAPH);
    let p = if n_nodes > 1 {
        (avg_degree / (n_nodes - 1) as f64).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut edges = Vec::new();
    for u in 0..n_nodes {
        for v in (u + 1)..n_nodes {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Maximum independent set: `min -sum x_v` with `x_u + x_v <= 1` per edge.
pub fn gen_mis(spec: &GenSpec) -> Result<MilpInstance> {
    let GenSpec::Mis {
        n_nodes,
        avg_degree,
        seed,
    } = *spec
    else {
        return Err(wrong_family(Family::Mis, spec));
    };
    spec.validate()?;
    graph_instance(
        spec.instance_name(),
        n_nodes,
        &er_graph(n_nodes, avg_degree, seed),
        -1.0,
        Sense::Le,
    )
}

/// Minimum vertex cover: `min sum x_v` with `x_u + x_v >= 1` per edge.
pub fn gen_mvc(spec: &GenSpec) -> Result<MilpInstance> {
    let GenSpec::Mvc {
        n_nodes,
        avg_degree,
        seed,
    } = *spec
    else {
        return Err(wrong_family(Family::Mvc, spec));
    };
    spec.validate()?;
    graph_instance(
        spec.instance_name(),
        n_nodes,
        &er_graph(n_nodes, avg_degree, seed),
        1.0,
        Sense::Ge,
    )
}

fn graph_instance(
    name: String,
    n_nodes: usize,
    edges: &[(usize, usize)],
    cost: f64,
    sense: Sense,
) -> Result<MilpInstance> {
    let mut b = MilpBuilder::new(name);
    for _ in 0..n_nodes {
        b.add_binary(cost);
    }
    for &(u, v) in edges {
        b.add_row(vec![(u, 1.0), (v, 1.0)], sense, 1.0);
    }
    b.build()
}
