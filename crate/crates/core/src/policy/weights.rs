//! `sgtw-1` weights files.
//!
//! Layout: one line of compact JSON
//! `{"format_version":"sgtw-1","d":..,"alpha":..,"beta":..,"tensors":[{"name":..,"shape":[..],"offset":..}]}`
//! terminated by `\n`, followed by a blob of little-endian `f32` values.
//! Offsets count `f32` elements from the start of the blob. Each affine map
//! `P` contributes `P.weight` with shape `[out, in]` (row-major) and `P.bias`
//! with shape `[out]`.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sgt::SgtWeights;
use crate::error::{Error, Result};

pub const WEIGHTS_FORMAT_VERSION: &str = "sgtw-1";

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: String,
    d: usize,
    alpha: f64,
    beta: f64,
    tensors: Vec<TensorEntry>,
}

pub fn weights_to_bytes(w: &SgtWeights) -> Result<Vec<u8>> {
    w.validate()?;
    let mut tensors = Vec::new();
    let mut blob: Vec<f32> = Vec::new();
    for (prefix, lin) in w.linears() {
        tensors.push(TensorEntry {
            name: format!("{prefix}.weight"),
            shape: vec![lin.out_dim, lin.in_dim],
            offset: blob.len(),
        });
        blob.extend_from_slice(&lin.weight);
        tensors.push(TensorEntry {
            name: format!("{prefix}.bias"),
            shape: vec![lin.out_dim],
            offset: blob.len(),
        });
        blob.extend_from_slice(&lin.bias);
    }
    let header = Header {
        format_version: WEIGHTS_FORMAT_VERSION.to_string(),
        d: w.d,
        alpha: w.alpha,
        beta: w.beta,
        tensors,
    };
    let mut bytes = serde_json::to_vec(&header).expect("header serializes");
    bytes.push(b'\n');
    bytes.reserve(blob.len() * 4);
    for v in blob {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Ok(bytes)
}

fn header_err(message: impl Into<String>) -> Error {
    Error::Parse {
        context: "weights header".into(),
        message: message.into(),
    }
}

pub fn weights_from_bytes(bytes: &[u8]) -> Result<SgtWeights> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| header_err("missing newline after header"))?;
    let header: Header =
        serde_json::from_slice(&bytes[..newline]).map_err(|e| header_err(e.to_string()))?;
    if header.format_version != WEIGHTS_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            expected: WEIGHTS_FORMAT_VERSION.into(),
            found: header.format_version,
        });
    }
    if header.d == 0 {
        return Err(header_err("d must be positive"));
    }
    let raw = &bytes[newline + 1..];
    if raw.len() % 4 != 0 {
        return Err(header_err(format!(
            "blob length {} is not a multiple of 4",
            raw.len()
        )));
    }
    let blob: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();

    let mut w = SgtWeights::zeros(header.d, header.alpha, header.beta);
    let mut expected: HashMap<String, (Vec<usize>, Option<usize>)> = HashMap::new();
    for (prefix, lin) in w.linears() {
        expected.insert(
            format!("{prefix}.weight"),
            (vec![lin.out_dim, lin.in_dim], None),
        );
        expected.insert(format!("{prefix}.bias"), (vec![lin.out_dim], None));
    }
    let mut used = 0usize;
    for t in &header.tensors {
        let Some((shape, slot)) = expected.get_mut(&t.name) else {
            return Err(Error::Tensor {
                name: t.name.clone(),
                message: "unknown tensor".into(),
            });
        };
        if *shape != t.shape {
            return Err(Error::Tensor {
                name: t.name.clone(),
                message: format!(
                    "shape {:?} does not match {:?} for d = {}",
                    t.shape, shape, header.d
                ),
            });
        }
        if slot.is_some() {
            return Err(Error::Tensor {
                name: t.name.clone(),
                message: "listed twice".into(),
            });
        }
        let len: usize = shape.iter().product();
        if t.offset + len > blob.len() {
            return Err(Error::Tensor {
                name: t.name.clone(),
                message: format!(
                    "elements {}..{} exceed blob of {}",
                    t.offset,
                    t.offset + len,
                    blob.len()
                ),
            });
        }
        used += len;
        *slot = Some(t.offset);
    }
    if used != blob.len() {
        return Err(header_err(format!(
            "tensors cover {used} elements but the blob holds {}",
            blob.len()
        )));
    }
    for (prefix, lin) in w.linears_mut() {
        for (suffix, dst) in [("weight", &mut lin.weight), ("bias", &mut lin.bias)] {
            let name = format!("{prefix}.{suffix}");
            let (_, slot) = &expected[&name];
            let offset = slot.ok_or_else(|| Error::Tensor {
                name: name.clone(),
                message: "missing".into(),
            })?;
            let len = dst.len();
            dst.copy_from_slice(&blob[offset..offset + len]);
        }
    }
    w.validate()?;
    if let Some((name, _)) = w
        .linears()
        .into_iter()
        .find(|(_, l)| l.weight.iter().chain(&l.bias).any(|v| !v.is_finite()))
    {
        return Err(Error::Tensor {
            name,
            message: "non-finite value".into(),
        });
    }
    Ok(w)
}

pub fn save_weights(w: &SgtWeights, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, weights_to_bytes(w)?)?;
    Ok(())
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<SgtWeights> {
    weights_from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn roundtrip_bitwise() {
        let mut rng = stream_rng(4, 0);
        let w = SgtWeights::random(32, 0.3, 0.7, &mut rng);
        let bytes = weights_to_bytes(&w).unwrap();
        let back = weights_from_bytes(&bytes).unwrap();
        assert_eq!(back, w);
        assert_eq!(weights_to_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn narrow_tensor_rejected_by_name() {
        let w = SgtWeights::zeros(32, 0.5, 0.5);
        let bytes = weights_to_bytes(&w).unwrap();
        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        let text = std::str::from_utf8(&bytes[..newline]).unwrap();
        let bad = text.replacen(
            r#""name":"attn.q.weight","shape":[32,32]"#,
            r#""name":"attn.q.weight","shape":[32,16]"#,
            1,
        );
        assert_ne!(bad, text);
        let mut corrupted = bad.into_bytes();
        corrupted.extend_from_slice(&bytes[newline..]);
        match weights_from_bytes(&corrupted) {
            Err(Error::Tensor { name, .. }) => assert_eq!(name, "attn.q.weight"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_blob_and_version() {
        let bytes = weights_to_bytes(&SgtWeights::zeros(4, 0.5, 0.5)).unwrap();
        assert!(weights_from_bytes(&bytes[..bytes.len() - 4]).is_err());
        assert!(weights_from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let text = String::from_utf8_lossy(&bytes).replace("sgtw-1", "sgtw-9");
        assert!(matches!(
            weights_from_bytes(text.as_bytes()),
            Err(Error::FormatVersion { .. })
        ));
    }
}
