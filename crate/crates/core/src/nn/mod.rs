//! Dense networks for the actor and critic: forward pass, hand-derived
//! backpropagation, Adam, and checkpoints. All arithmetic is `f64`.

mod adam;
mod checkpoint;
mod mlp;
mod policy;

pub use adam::AdamState;
pub use checkpoint::{Checkpoint, CheckpointHeader, LayerParams, CHECKPOINT_VERSION};
pub use mlp::{Dense, ForwardCache, Gradients, Mlp};
pub use policy::{argmax, entropy, log_softmax, sample_action, softmax};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bad architecture: {0}")]
    BadArchitecture(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("distribution has no probability mass")]
    DegenerateDistribution,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = NnError> = std::result::Result<T, E>;
