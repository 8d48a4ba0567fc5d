//! Learned variable scoring: graph features, the simplified graph transformer
//! forward pass, and its weights file.

pub mod features;
pub mod sgt;
pub mod weights;

pub use features::{extract_features, PolicyState};
pub use sgt::{linear_attention, sgt_forward, SgtWeights};
pub use weights::{load_weights, save_weights};
