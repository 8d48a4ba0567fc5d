//! Simplified graph transformer: linear global attention blended with two
//! interleaved half-convolutions over the variable-constraint graph.
//!
//! Node matrices are stored row-major as flat `Vec<f64>` with `d` columns.
//! Parameters are kept as `f32` (the on-disk precision) and every
//! computation runs in `f64`.

use rand::distributions::{Distribution, Uniform};

use super::features::{PolicyState, CON_FEATURES, VAR_FEATURES};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const DEFAULT_DIM: usize = 32;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.5;
pub const N_LAYERS: usize = 2;

/// Affine map `y = W x + b` with `W` stored row-major as `[out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub out_dim: usize,
    pub in_dim: usize,
    pub weight: Vec<f32>,
    pub bias: Vec<f32>,
}

impl Linear {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self {
            out_dim,
            in_dim,
            weight: vec![0.0; out_dim * in_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Uniform in `[-1/sqrt(in), 1/sqrt(in)]` for weights and biases.
    pub fn random(out_dim: usize, in_dim: usize, rng: &mut Rng) -> Self {
        let a = 1.0 / (in_dim as f32).sqrt();
        let dist = Uniform::new_inclusive(-a, a);
        Self {
            out_dim,
            in_dim,
            weight: (0..out_dim * in_dim).map(|_| dist.sample(rng)).collect(),
            bias: (0..out_dim).map(|_| dist.sample(rng)).collect(),
        }
    }

    /// Applies the map to every row of `x` (`rows x in_dim`).
    pub fn apply(&self, x: &[f64], rows: usize) -> Vec<f64> {
        debug_assert_eq!(x.len(), rows * self.in_dim);
        let mut out = vec![0.0; rows * self.out_dim];
        for r in 0..rows {
            let xr = &x[r * self.in_dim..(r + 1) * self.in_dim];
            let yr = &mut out[r * self.out_dim..(r + 1) * self.out_dim];
            for (o, y) in yr.iter_mut().enumerate() {
                let w = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
                let mut acc = self.bias[o] as f64;
                for (wi, xi) in w.iter().zip(xr) {
                    acc += *wi as f64 * xi;
                }
                *y = acc;
            }
        }
        out
    }
}

/// Two affine maps with a ReLU in between.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub l1: Linear,
    pub l2: Linear,
}

impl Mlp {
    fn apply(&self, x: &[f64], rows: usize) -> Vec<f64> {
        let mut h = self.l1.apply(x, rows);
        for v in &mut h {
            *v = v.max(0.0);
        }
        self.l2.apply(&h, rows)
    }
}

/// One constraint-side and one variable-side update.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub con: Mlp,
    pub var: Mlp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgtWeights {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub embed_var: Linear,
    pub embed_con: Linear,
    pub embed_edge: Linear,
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub convs: Vec<ConvLayer>,
    pub head: Mlp,
}

impl SgtWeights {
    fn build(
        d: usize,
        alpha: f64,
        beta: f64,
        mut make: impl FnMut(usize, usize) -> Linear,
    ) -> Self {
        let mut mlp = |out: usize, hidden: usize, inp: usize| Mlp {
            l1: make(hidden, inp),
            l2: make(out, hidden),
        };
        let convs = (0..N_LAYERS)
            .map(|_| ConvLayer {
                con: mlp(d, d, 2 * d),
                var: mlp(d, d, 2 * d),
            })
            .collect();
        let head = mlp(1, d, d);
        Self {
            d,
            alpha,
            beta,
            embed_var: make(d, VAR_FEATURES),
            embed_con: make(d, CON_FEATURES),
            embed_edge: make(d, 1),
            q: make(d, d),
            k: make(d, d),
            v: make(d, d),
            convs,
            head,
        }
    }

    pub fn zeros(d: usize, alpha: f64, beta: f64) -> Self {
        Self::build(d, alpha, beta, Linear::zeros)
    }

    /// Untrained weights for smoke tests and the learned-policy plumbing.
    pub fn random(d: usize, alpha: f64, beta: f64, rng: &mut Rng) -> Self {
        Self::build(d, alpha, beta, |o, i| Linear::random(o, i, rng))
    }

    /// Every affine map with its tensor-name prefix, in file order.
    pub fn linears(&self) -> Vec<(String, &Linear)> {
        let mut out = vec![
            ("embed_var".to_string(), &self.embed_var),
            ("embed_con".to_string(), &self.embed_con),
            ("embed_edge".to_string(), &self.embed_edge),
            ("attn.q".to_string(), &self.q),
            ("attn.k".to_string(), &self.k),
            ("attn.v".to_string(), &self.v),
        ];
        for (k, c) in self.convs.iter().enumerate() {
            out.push((format!("conv{k}.con.l1"), &c.con.l1));
            out.push((format!("conv{k}.con.l2"), &c.con.l2));
            out.push((format!("conv{k}.var.l1"), &c.var.l1));
            out.push((format!("conv{k}.var.l2"), &c.var.l2));
        }
        out.push(("head.l1".to_string(), &self.head.l1));
        out.push(("head.l2".to_string(), &self.head.l2));
        out
    }

    pub(crate) fn linears_mut(&mut self) -> Vec<(String, &mut Linear)> {
        let mut out = vec![
            ("embed_var".to_string(), &mut self.embed_var),
            ("embed_con".to_string(), &mut self.embed_con),
            ("embed_edge".to_string(), &mut self.embed_edge),
            ("attn.q".to_string(), &mut self.q),
            ("attn.k".to_string(), &mut self.k),
            ("attn.v".to_string(), &mut self.v),
        ];
        for (k, c) in self.convs.iter_mut().enumerate() {
            out.push((format!("conv{k}.con.l1"), &mut c.con.l1));
            out.push((format!("conv{k}.con.l2"), &mut c.con.l2));
            out.push((format!("conv{k}.var.l1"), &mut c.var.l1));
            out.push((format!("conv{k}.var.l2"), &mut c.var.l2));
        }
        out.push(("head.l1".to_string(), &mut self.head.l1));
        out.push(("head.l2".to_string(), &mut self.head.l2));
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{what} = {v} outside [0, 1]"
                )));
            }
        }
        let reference = Self::zeros(self.d, self.alpha, self.beta);
        for ((name, got), (_, want)) in self.linears().into_iter().zip(reference.linears()) {
            if got.out_dim != want.out_dim
                || got.in_dim != want.in_dim
                || got.weight.len() != want.weight.len()
                || got.bias.len() != want.bias.len()
            {
                return Err(Error::Tensor {
                    name,
                    message: format!(
                        "expected [{}, {}] for d = {}, found [{}, {}]",
                        want.out_dim, want.in_dim, self.d, got.out_dim, got.in_dim
                    ),
                });
            }
        }
        Ok(())
    }
}

fn ensure_finite(stage: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical {
            stage: stage.to_string(),
        })
    }
}

fn frobenius_normalize(m: &mut [f64]) {
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in m {
            *v /= norm;
        }
    }
}

/// Linear global attention in factored `O(N d^2)` form:
/// `H = beta * D^-1 [V + Q~(K~^T V)/N] + (1 - beta) * H0` with
/// `D = diag(1 + Q~(K~^T 1)/N)` and `Q~`, `K~` scaled to unit Frobenius norm.
/// All matrices are `N x d` row-major; `q` and `k` are normalized in place.
pub fn linear_attention(
    q: &mut [f64],
    k: &mut [f64],
    v: &[f64],
    h0: &[f64],
    d: usize,
    beta: f64,
) -> Vec<f64> {
    let n_nodes = h0.len() / d;
    frobenius_normalize(q);
    frobenius_normalize(k);
    let inv_n = 1.0 / n_nodes as f64;
    // K~^T 1 and K~^T V.
    let mut k_sum = vec![0.0; d];
    let mut kv = vec![0.0; d * d];
    for r in 0..n_nodes {
        let kr = &k[r * d..(r + 1) * d];
        let vr = &v[r * d..(r + 1) * d];
        for a in 0..d {
            k_sum[a] += kr[a];
            let row = &mut kv[a * d..(a + 1) * d];
            for (b, slot) in row.iter_mut().enumerate() {
                *slot += kr[a] * vr[b];
            }
        }
    }
    let mut out = vec![0.0; n_nodes * d];
    for r in 0..n_nodes {
        let qr = &q[r * d..(r + 1) * d];
        let denom = 1.0 + inv_n * qr.iter().zip(&k_sum).map(|(a, b)| a * b).sum::<f64>();
        let or = &mut out[r * d..(r + 1) * d];
        for (b, o) in or.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in 0..d {
                acc += qr[a] * kv[a * d + b];
            }
            let num = v[r * d + b] + inv_n * acc;
            *o = beta * num / denom + (1.0 - beta) * h0[r * d + b];
        }
    }
    out
}

fn flatten<const K: usize>(rows: &[[f64; K]]) -> Vec<f64> {
    rows.iter().flat_map(|r| r.iter().copied()).collect()
}

/// Scores in `(0, 1)` for every variable of the state.
pub fn sgt_forward(state: &PolicyState, w: &SgtWeights) -> Result<Vec<f64>> {
    w.validate()?;
    let d = w.d;
    let (n, m) = (state.graph.n_var, state.graph.n_con);
    if state.var_feats.len() != n {
        return Err(Error::dim("variable features", n, state.var_feats.len()));
    }
    if state.con_feats.len() != m {
        return Err(Error::dim("constraint features", m, state.con_feats.len()));
    }
    if state.edge_feats.len() != state.graph.edges.len() {
        return Err(Error::dim(
            "edge features",
            state.graph.edges.len(),
            state.edge_feats.len(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let var_in = flatten(&state.var_feats);
    let con_in = flatten(&state.con_feats);
    ensure_finite("input features", &var_in)?;
    ensure_finite("input features", &con_in)?;
    ensure_finite("input features", &state.edge_feats)?;

    // H0 stacks variable rows first, then constraint rows.
    let mut h0 = w.embed_var.apply(&var_in, n);
    h0.extend(w.embed_con.apply(&con_in, m));
    let edge_emb = w
        .embed_edge
        .apply(&state.edge_feats, state.edge_feats.len());
    ensure_finite("embedding", &h0)?;
    ensure_finite("embedding", &edge_emb)?;

    let n_nodes = n + m;
    let mut q = w.q.apply(&h0, n_nodes);
    let mut k = w.k.apply(&h0, n_nodes);
    let v = w.v.apply(&h0, n_nodes);
    let h_attn = linear_attention(&mut q, &mut k, &v, &h0, d, w.beta);
    ensure_finite("attention", &h_attn)?;

    let mut h_var = h0[..n * d].to_vec();
    let mut h_con = h0[n * d..].to_vec();
    for layer in &w.convs {
        let mut input = vec![0.0; m * 2 * d];
        for j in 0..m {
            input[j * 2 * d..j * 2 * d + d].copy_from_slice(&h_con[j * d..(j + 1) * d]);
        }
        for (e, &(i, j, _)) in state.graph.edges.iter().enumerate() {
            for a in 0..d {
                input[j * 2 * d + d + a] += h_var[i * d + a] * edge_emb[e * d + a];
            }
        }
        h_con = layer.con.apply(&input, m);
        ensure_finite("constraint convolution", &h_con)?;

        let mut input = vec![0.0; n * 2 * d];
        for i in 0..n {
            input[i * 2 * d..i * 2 * d + d].copy_from_slice(&h_var[i * d..(i + 1) * d]);
        }
        for (e, &(i, j, _)) in state.graph.edges.iter().enumerate() {
            for a in 0..d {
                input[i * 2 * d + d + a] += h_con[j * d + a] * edge_emb[e * d + a];
            }
        }
        h_var = layer.var.apply(&input, n);
        ensure_finite("variable convolution", &h_var)?;
    }

    let blended: Vec<f64> = h_attn[..n * d]
        .iter()
        .zip(&h_var)
        .map(|(a, g)| (1.0 - w.alpha) * a + w.alpha * g)
        .collect();
    let logits = w.head.apply(&blended, n);
    ensure_finite("output head", &logits)?;
    Ok(logits.iter().map(|z| 1.0 / (1.0 + (-z).exp())).collect())
}
