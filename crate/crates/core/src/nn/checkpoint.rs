//! Versioned JSON checkpoints for an actor/critic pair.
//!
//! The header fixes the architecture and the provenance hashes; weights are
//! stored per layer as flat row-major arrays. `serde_json` prints every
//! `f64` in shortest round-trip decimal form, so reloading is exact.

use super::{Dense, Mlp, NnError, Result};
use crate::market_data::NormStats;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub actor_dims: Vec<usize>,
    pub critic_dims: Vec<usize>,
    pub feature_names_hash: String,
    pub config_hash: String,
    pub data_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub updates: u64,
    pub timesteps: u64,
    /// Feature statistics the networks were trained against.
    pub norm_stats: Option<NormStats>,
    pub actor: Vec<LayerParams>,
    pub critic: Vec<LayerParams>,
}

fn layer_params(net: &Mlp) -> Vec<LayerParams> {
    net.layers
        .iter()
        .map(|l| LayerParams {
            weights: l.weights.clone(),
            bias: l.bias.clone(),
        })
        .collect()
}

fn rebuild(dims: &[usize], params: &[LayerParams], which: &str) -> Result<Mlp> {
    if dims.len() != params.len() + 1 {
        return Err(NnError::Checkpoint(format!(
            "{which}: header lists {} layers, file has {}",
            dims.len().saturating_sub(1),
            params.len()
        )));
    }
    let layers = dims
        .windows(2)
        .zip(params)
        .enumerate()
        .map(|(k, (w, p))| {
            if p.weights.len() != w[0] * w[1] || p.bias.len() != w[1] {
                return Err(NnError::Checkpoint(format!(
                    "{which} layer {k}: expected {}x{} weights, found {} weights and {} biases",
                    w[1],
                    w[0],
                    p.weights.len(),
                    p.bias.len()
                )));
            }
            Ok(Dense {
                inputs: w[0],
                outputs: w[1],
                weights: p.weights.clone(),
                bias: p.bias.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Mlp::from_layers(layers)
}

impl Checkpoint {
    pub fn new(actor: &Mlp, critic: &Mlp, feature_names_hash: String, config_hash: String, data_fingerprint: String) -> Self {
        Self {
            header: CheckpointHeader {
                format_version: CHECKPOINT_VERSION,
                actor_dims: actor.dims(),
                critic_dims: critic.dims(),
                feature_names_hash,
                config_hash,
                data_fingerprint,
            },
            updates: 0,
            timesteps: 0,
            norm_stats: None,
            actor: layer_params(actor),
            critic: layer_params(critic),
        }
    }

    pub fn networks(&self) -> Result<(Mlp, Mlp)> {
        if self.header.format_version != CHECKPOINT_VERSION {
            return Err(NnError::Checkpoint(format!(
                "unsupported format version {}",
                self.header.format_version
            )));
        }
        Ok((
            rebuild(&self.header.actor_dims, &self.actor, "actor")?,
            rebuild(&self.header.critic_dims, &self.critic, "critic")?,
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| NnError::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Self = serde_json::from_str(text).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        ckpt.networks()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
