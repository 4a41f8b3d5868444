//! Engagement ("reward") model: feature encoding, a from-scratch MLP with
//! two hidden layers trained on binary cross-entropy over logged triplets,
//! numerical gradient checking, and a bit-exact checkpoint format.

mod checkpoint;
mod features;
mod mlp;
mod train;

pub use features::{encode_cyclic, FeatureSpec, NUM_CATEGORICALS, TEMPORAL_DIM};
pub use mlp::{
    batch_loss, bce_loss, gradient_check, gradient_check_with_bias_fault, DenseLayer,
    EmbeddingTable, ForwardMode, MlpGrads, MlpParams, HIDDEN_SIZES,
};
pub use train::{train, EpochStats, Optimizer, TrainConfig, TrainingReport};

use thiserror::Error;

use crate::domain::{ContentDistribution, UserContext};

#[derive(Debug, Error)]
pub enum RewardModelError {
    #[error("expected vector of length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("cyclic value {value} outside 0..{period}")]
    OutOfRange { value: u32, period: u32 },
    #[error("context is missing the {window_days}-day consumption aggregate")]
    MissingAggregate { window_days: u32 },
    #[error("dataset is empty or contains a single reward class")]
    DegenerateDataset,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
}

/// A trained model bundled with the feature spec that produced its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub feature_spec: FeatureSpec,
    pub params: MlpParams,
}

impl TrainedModel {
    /// Predicted engagement probability for a (context, action) pair.
    pub fn predict(
        &self,
        ctx: &UserContext,
        action: &ContentDistribution,
    ) -> Result<f64, RewardModelError> {
        let x = self.feature_spec.encode(ctx, action)?;
        self.params.forward(&x, ForwardMode::Eval)
    }

    /// Predicted engagement probability for an already-encoded vector.
    pub fn predict_encoded(&self, x: &[f64]) -> Result<f64, RewardModelError> {
        self.params.forward(x, ForwardMode::Eval)
    }
}
