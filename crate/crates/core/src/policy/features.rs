//! LP-free node and edge features of the variable-constraint graph.

use crate::error::{Error, Result};
use crate::milp::{to_bipartite_graph, BipartiteGraph, MilpInstance, Sense, Solution};

pub const VAR_FEATURES: usize = 7;
pub const CON_FEATURES: usize = 6;

/// Input of the scoring network for one LNS state.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub graph: BipartiteGraph,
    /// Per variable: `c_i / ||c||_inf`, mean `|A_.i|`, degree / m, max coefficient,
    /// min coefficient, integrality flag, incumbent value.
    pub var_feats: Vec<[f64; VAR_FEATURES]>,
    /// Per constraint: mean coefficient, degree / n, `b_j / ||b||_inf`, sense
    /// (LE -1, EQ 0, GE +1), row norm over the largest row norm, cosine with `c`.
    pub con_feats: Vec<[f64; CON_FEATURES]>,
    /// Per edge (same order as `graph.edges`): coefficient over the row's max |coefficient|.
    pub edge_feats: Vec<f64>,
    pub incumbent: Solution,
}

fn or_one(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

pub fn extract_features(inst: &MilpInstance, incumbent: &Solution) -> Result<PolicyState> {
    let (n, m) = (inst.n(), inst.m());
    if incumbent.len() != n {
        return Err(Error::dim("incumbent", n, incumbent.len()));
    }
    let matrix = inst.matrix();
    let c = inst.obj();
    let c_inf = or_one(c.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b_inf = or_one(inst.rhs().iter().fold(0.0f64, |a, v| a.max(v.abs())));

    let mut var_feats = Vec::with_capacity(n);
    for i in 0..n {
        let (_, vals) = matrix.col(i);
        let deg = vals.len();
        let (mean_abs, max, min) = if deg == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (
                vals.iter().map(|v| v.abs()).sum::<f64>() / deg as f64,
                vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                vals.iter().copied().fold(f64::INFINITY, f64::min),
            )
        };
        var_feats.push([
            c[i] / c_inf,
            mean_abs,
            if m == 0 { 0.0 } else { deg as f64 / m as f64 },
            max,
            min,
            if inst.is_integer()[i] { 1.0 } else { 0.0 },
            incumbent.x[i],
        ]);
    }

    let row_norms: Vec<f64> = (0..m)
        .map(|j| matrix.row(j).1.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let max_row_norm = or_one(row_norms.iter().copied().fold(0.0, f64::max));
    let mut con_feats = Vec::with_capacity(m);
    let mut edge_feats = Vec::with_capacity(matrix.nnz());
    for j in 0..m {
        let (cols, vals) = matrix.row(j);
        let deg = vals.len();
        let mean = if deg == 0 {
            0.0
        } else {
            vals.iter().sum::<f64>() / deg as f64
        };
        let dot: f64 = cols.iter().zip(vals).map(|(&i, &a)| a * c[i]).sum();
        let cosine = if row_norms[j] > 0.0 && c_norm > 0.0 {
            dot / (row_norms[j] * c_norm)
        } else {
            0.0
        };
        let sense = match inst.sense()[j] {
            Sense::Le => -1.0,
            Sense::Eq => 0.0,
            Sense::Ge => 1.0,
        };
        con_feats.push([
            mean,
            if n == 0 { 0.0 } else { deg as f64 / n as f64 },
            inst.rhs()[j] / b_inf,
            sense,
            row_norms[j] / max_row_norm,
            cosine,
        ]);
        let row_max = or_one(vals.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        edge_feats.extend(vals.iter().map(|a| a / row_max));
    }

    Ok(PolicyState {
        graph: to_bipartite_graph(inst),
        var_feats,
        con_feats,
        edge_feats,
        incumbent: incumbent.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::MilpBuilder;

    #[test]
    fn small_instance_features() {
        let mut b = MilpBuilder::new("f");
        let x = b.add_binary(2.0);
        let y = b.add_binary(-4.0);
        let z = b.add_var(0.0, 0.0, 3.0, false);
        b.add_row(vec![(x, 1.0), (y, -2.0)], Sense::Le, 4.0);
        b.add_row(vec![(y, 3.0), (z, 4.0)], Sense::Ge, -2.0);
        let inst = b.build().unwrap();
        let sol = Solution::new(&inst, vec![1.0, 0.0, 2.5]).unwrap();
        let s = extract_features(&inst, &sol).unwrap();
        assert_eq!(s.var_feats[1], [-1.0, 2.5, 1.0, 3.0, -2.0, 1.0, 0.0]);
        assert_eq!(s.var_feats[2][5], 0.0);
        assert_eq!(s.var_feats[2][6], 2.5);
        assert_eq!(s.con_feats[0][..4], [-0.5, 2.0 / 3.0, 1.0, -1.0]);
        assert_eq!(s.con_feats[1][3], 1.0);
        assert_eq!(s.con_feats[1][4], 1.0);
        assert_eq!(s.edge_feats, vec![0.5, -1.0, 0.75, 1.0]);
        // cos(row0, c) = (2 + 8) / (sqrt(5) * sqrt(20)) = 1
        assert!((s.con_feats[0][5] - 1.0).abs() < 1e-15);
    }
}
