//! Mini-batch training of the engagement model on logged triplets with
//! binary cross-entropy, seeded end to end so a fixed seed reproduces the
//! parameters bit for bit.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::domain::LoggedTriplet;

use super::features::FeatureSpec;
use super::mlp::{bce_loss, sample_gradient, ForwardMode, MlpGrads, MlpParams};
use super::RewardModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Fraction of the dataset held out for per-epoch validation loss.
    pub validation_fraction: f64,
    /// Dropout applied to hidden activations during training.
    pub dropout_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 256,
            epochs: 20,
            seed: 7,
            optimizer: Optimizer::Adam,
            validation_fraction: 0.1,
            dropout_rate: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RewardModelError> {
        if self.learning_rate <= 0.0 || self.learning_rate.is_nan() {
            return Err(RewardModelError::InvalidConfig(
                "learning_rate must be > 0".into(),
            ));
        }
        if self.batch_size < 1 {
            return Err(RewardModelError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(RewardModelError::InvalidConfig(
                "validation_fraction must be in [0, 1)".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(RewardModelError::InvalidConfig(
                "dropout_rate must be in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Eval-mode losses measured after each epoch's updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub epochs: Vec<EpochStats>,
    pub train_examples: usize,
    pub validation_examples: usize,
    pub positive_rate: f64,
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

/// Trains the MLP by mini-batch gradient descent with backprop, minimizing
/// mean BCE. Requires both reward classes in the (post-split) training data.
pub fn train(
    dataset: &[LoggedTriplet],
    spec: &FeatureSpec,
    cfg: &TrainConfig,
) -> Result<(MlpParams, TrainingReport), RewardModelError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(RewardModelError::DegenerateDataset);
    }
    for t in dataset {
        if t.features.len() != spec.encoded_dim() {
            return Err(RewardModelError::ShapeMismatch {
                expected: spec.encoded_dim(),
                got: t.features.len(),
            });
        }
    }
    let positives = dataset.iter().filter(|t| t.reward == 1).count();
    if positives == 0 || positives == dataset.len() {
        return Err(RewardModelError::DegenerateDataset);
    }

    // Seeded validation split.
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    indices.shuffle(&mut StdRng::seed_from_u64(mix(cfg.seed, 1)));
    let n_val = ((dataset.len() as f64) * cfg.validation_fraction).floor() as usize;
    let (val_idx, train_idx) = indices.split_at(n_val);
    let train_idx = train_idx.to_vec();
    let train_positives = train_idx.iter().filter(|&&i| dataset[i].reward == 1).count();
    if train_positives == 0 || train_positives == train_idx.len() {
        return Err(RewardModelError::DegenerateDataset);
    }

    let mut params = MlpParams::init(spec, cfg.dropout_rate, mix(cfg.seed, 2));
    let mut grads = MlpGrads::zeros_like(&params);
    let mut adam = AdamState {
        m: vec![0.0; params.param_count()],
        v: vec![0.0; params.param_count()],
        t: 0,
    };

    let mut order = train_idx.clone();
    let mut report = TrainingReport {
        epochs: Vec::with_capacity(cfg.epochs),
        train_examples: train_idx.len(),
        validation_examples: val_idx.len(),
        positive_rate: positives as f64 / dataset.len() as f64,
    };
    let mut step: u64 = 0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut StdRng::seed_from_u64(mix(cfg.seed, 100 + epoch as u64)));
        for batch in order.chunks(cfg.batch_size) {
            grads.zero();
            for &i in batch {
                let triplet = &dataset[i];
                let mode = if cfg.dropout_rate > 0.0 {
                    ForwardMode::Train { dropout_seed: mix(cfg.seed, 0xd0_0000 + step) }
                } else {
                    ForwardMode::Eval
                };
                sample_gradient(
                    &params,
                    &triplet.features,
                    triplet.reward as f64,
                    mode,
                    &mut grads,
                )?;
                step += 1;
            }
            apply_update(&mut params, &grads, batch.len(), cfg, &mut adam);
        }

        let train_loss = split_loss(&params, dataset, &train_idx)?;
        let validation_loss = if val_idx.is_empty() {
            None
        } else {
            Some(split_loss(&params, dataset, val_idx)?)
        };
        if !train_loss.is_finite() || validation_loss.is_some_and(|l| !l.is_finite()) {
            return Err(RewardModelError::NonFiniteLoss { epoch });
        }
        if !params.is_finite() {
            return Err(RewardModelError::NonFiniteLoss { epoch });
        }
        report.epochs.push(EpochStats { epoch, train_loss, validation_loss });
    }
    Ok((params, report))
}

fn split_loss(
    params: &MlpParams,
    dataset: &[LoggedTriplet],
    idx: &[usize],
) -> Result<f64, RewardModelError> {
    let mut total = 0.0;
    for &i in idx {
        let t = &dataset[i];
        let p = params.forward(&t.features, ForwardMode::Eval)?;
        total += bce_loss(p, t.reward as f64);
    }
    Ok(total / idx.len() as f64)
}

fn apply_update(
    params: &mut MlpParams,
    grads: &MlpGrads,
    batch_len: usize,
    cfg: &TrainConfig,
    adam: &mut AdamState,
) {
    let scale = 1.0 / batch_len as f64;
    match cfg.optimizer {
        Optimizer::Sgd => {
            grads.for_each_flat(|idx, g| {
                let p = params.get_flat(idx);
                params.set_flat(idx, p - cfg.learning_rate * g * scale);
            });
        }
        Optimizer::Adam => {
            const BETA1: f64 = 0.9;
            const BETA2: f64 = 0.999;
            const EPS: f64 = 1e-8;
            adam.t += 1;
            let bc1 = 1.0 - BETA1.powi(adam.t as i32);
            let bc2 = 1.0 - BETA2.powi(adam.t as i32);
            grads.for_each_flat(|idx, g| {
                let g = g * scale;
                adam.m[idx] = BETA1 * adam.m[idx] + (1.0 - BETA1) * g;
                adam.v[idx] = BETA2 * adam.v[idx] + (1.0 - BETA2) * g * g;
                let m_hat = adam.m[idx] / bc1;
                let v_hat = adam.v[idx] / bc2;
                let p = params.get_flat(idx);
                params.set_flat(idx, p - cfg.learning_rate * m_hat / (v_hat.sqrt() + EPS));
            });
        }
    }
}

/// Splitmix64-style mixer used to derive independent sub-seeds.
pub(crate) fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
