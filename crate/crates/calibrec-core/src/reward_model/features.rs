//! Feature encoding for the engagement model.
//!
//! The encoded vector layout is fixed by the spec and stable across runs:
//!
//! ```text
//! [ aggregates (windows * C) | hour sin,cos | dow sin,cos |
//!   country idx | device idx | cohort idx | action (C) ]
//! ```
//!
//! Categorical slots hold embedding-table row indices as floats; they are
//! resolved to dense vectors inside the network's forward pass. The layout
//! is invertible (see [`FeatureSpec::decode_context`]), which lets target
//! policies recover the request context from a logged feature vector.

use serde::{Deserialize, Serialize};

use crate::domain::{ContentDistribution, UserContext, WindowAggregate};

use super::RewardModelError;

/// Declares which features are encoded and with what vocabularies. The
/// encoded dimension is a pure function of this struct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// Number of content types `C`; sizes the aggregate and action blocks.
    pub catalog_size: usize,
    /// Consumption-aggregate windows, in days, encoded in order.
    pub aggregate_windows: Vec<u32>,
    /// Known country codes; unseen values map to a reserved row.
    pub country_vocab: Vec<String>,
    /// Known device classes; unseen values map to a reserved row.
    pub device_vocab: Vec<String>,
    /// Number of cohorts; ids at or past this map to the reserved row.
    pub num_cohorts: usize,
    /// Embedding width used for each categorical feature.
    pub embed_dim: usize,
}

/// Number of categorical features (country, device, cohort).
pub const NUM_CATEGORICALS: usize = 3;

/// Temporal block width: sin/cos for hour of day and day of week.
pub const TEMPORAL_DIM: usize = 4;

impl FeatureSpec {
    /// Spec with the default windows and embedding width for a deployment's
    /// vocabularies.
    pub fn new(
        catalog_size: usize,
        aggregate_windows: Vec<u32>,
        country_vocab: Vec<String>,
        device_vocab: Vec<String>,
        num_cohorts: usize,
        embed_dim: usize,
    ) -> Self {
        Self {
            catalog_size,
            aggregate_windows,
            country_vocab,
            device_vocab,
            num_cohorts,
            embed_dim,
        }
    }

    /// Length of the encoded feature vector.
    pub fn encoded_dim(&self) -> usize {
        self.aggregate_windows.len() * self.catalog_size
            + TEMPORAL_DIM
            + NUM_CATEGORICALS
            + self.catalog_size
    }

    /// Width of the network input after embedding lookup.
    pub fn input_dim(&self) -> usize {
        self.aggregate_windows.len() * self.catalog_size
            + TEMPORAL_DIM
            + NUM_CATEGORICALS * self.embed_dim
            + self.catalog_size
    }

    /// Embedding-table row counts, one per categorical, each with an extra
    /// out-of-vocabulary row.
    pub fn embedding_rows(&self) -> [usize; NUM_CATEGORICALS] {
        [
            self.country_vocab.len() + 1,
            self.device_vocab.len() + 1,
            self.num_cohorts + 1,
        ]
    }

    /// Offset of the first categorical index slot.
    pub fn categorical_offset(&self) -> usize {
        self.aggregate_windows.len() * self.catalog_size + TEMPORAL_DIM
    }

    /// Offset of the temporal block.
    pub fn temporal_offset(&self) -> usize {
        self.aggregate_windows.len() * self.catalog_size
    }

    /// Slot range of the aggregate for window `w` (by position in
    /// `aggregate_windows`).
    pub fn aggregate_range(&self, window_position: usize) -> std::ops::Range<usize> {
        let start = window_position * self.catalog_size;
        start..start + self.catalog_size
    }

    /// Slot range of the appended action distribution.
    pub fn action_range(&self) -> std::ops::Range<usize> {
        let start = self.categorical_offset() + NUM_CATEGORICALS;
        start..start + self.catalog_size
    }

    fn country_index(&self, value: &str) -> usize {
        self.country_vocab
            .iter()
            .position(|v| v == value)
            .unwrap_or(self.country_vocab.len())
    }

    fn device_index(&self, value: &str) -> usize {
        self.device_vocab
            .iter()
            .position(|v| v == value)
            .unwrap_or(self.device_vocab.len())
    }

    fn cohort_index(&self, cohort_id: u32) -> usize {
        let id = cohort_id as usize;
        if id < self.num_cohorts {
            id
        } else {
            self.num_cohorts
        }
    }

    /// Encodes a (context, action) pair into the fixed layout. Deterministic:
    /// the same inputs always produce the same vector.
    pub fn encode(
        &self,
        ctx: &UserContext,
        action: &ContentDistribution,
    ) -> Result<Vec<f64>, RewardModelError> {
        if action.len() != self.catalog_size {
            return Err(RewardModelError::ShapeMismatch {
                expected: self.catalog_size,
                got: action.len(),
            });
        }
        let mut x = Vec::with_capacity(self.encoded_dim());
        for &window in &self.aggregate_windows {
            match ctx.aggregate(window) {
                Some(agg) if agg.mass.len() == self.catalog_size => {
                    x.extend_from_slice(&agg.mass);
                }
                Some(agg) => {
                    return Err(RewardModelError::ShapeMismatch {
                        expected: self.catalog_size,
                        got: agg.mass.len(),
                    });
                }
                None => return Err(RewardModelError::MissingAggregate { window_days: window }),
            }
        }
        let (hour_sin, hour_cos) = encode_cyclic(ctx.hour_of_day as u32, 24)?;
        let (dow_sin, dow_cos) = encode_cyclic(ctx.day_of_week as u32, 7)?;
        x.extend_from_slice(&[hour_sin, hour_cos, dow_sin, dow_cos]);
        x.push(self.country_index(&ctx.country) as f64);
        x.push(self.device_index(&ctx.device) as f64);
        x.push(self.cohort_index(ctx.cohort_id) as f64);
        x.extend_from_slice(action.mass());
        debug_assert_eq!(x.len(), self.encoded_dim());
        Ok(x)
    }

    /// Replaces the action block of an encoded vector, reusing the context
    /// prefix. Used to score every action of a grid against one context.
    pub fn with_action(
        &self,
        x: &[f64],
        action: &ContentDistribution,
    ) -> Result<Vec<f64>, RewardModelError> {
        if x.len() != self.encoded_dim() {
            return Err(RewardModelError::ShapeMismatch {
                expected: self.encoded_dim(),
                got: x.len(),
            });
        }
        if action.len() != self.catalog_size {
            return Err(RewardModelError::ShapeMismatch {
                expected: self.catalog_size,
                got: action.len(),
            });
        }
        let mut out = x.to_vec();
        out[self.action_range()].copy_from_slice(action.mass());
        Ok(out)
    }

    /// Inverts the context portion of an encoded vector. The user id is not
    /// encoded and comes back empty; out-of-vocabulary categoricals decode
    /// to a `~oov` placeholder. Re-encoding a decoded context reproduces the
    /// original context slots bit-for-bit.
    pub fn decode_context(&self, x: &[f64]) -> Result<UserContext, RewardModelError> {
        if x.len() != self.encoded_dim() {
            return Err(RewardModelError::ShapeMismatch {
                expected: self.encoded_dim(),
                got: x.len(),
            });
        }
        let mut aggregates = Vec::with_capacity(self.aggregate_windows.len());
        for (w, &window) in self.aggregate_windows.iter().enumerate() {
            let mass = x[self.aggregate_range(w)].to_vec();
            aggregates.push(WindowAggregate { window_days: window, mass });
        }
        let t = self.temporal_offset();
        let hour = decode_cyclic(x[t], x[t + 1], 24);
        let dow = decode_cyclic(x[t + 2], x[t + 3], 7);
        let c = self.categorical_offset();
        let country_idx = x[c] as usize;
        let device_idx = x[c + 1] as usize;
        let cohort_idx = x[c + 2] as usize;
        Ok(UserContext {
            user_id: String::new(),
            cohort_id: cohort_idx as u32,
            country: self
                .country_vocab
                .get(country_idx)
                .cloned()
                .unwrap_or_else(|| "~oov".to_string()),
            device: self
                .device_vocab
                .get(device_idx)
                .cloned()
                .unwrap_or_else(|| "~oov".to_string()),
            hour_of_day: hour as u8,
            day_of_week: dow as u8,
            consumption_aggregates: aggregates,
        })
    }

    /// The action distribution recorded in an encoded vector.
    pub fn decode_action(&self, x: &[f64]) -> Result<ContentDistribution, RewardModelError> {
        if x.len() != self.encoded_dim() {
            return Err(RewardModelError::ShapeMismatch {
                expected: self.encoded_dim(),
                got: x.len(),
            });
        }
        Ok(crate::domain::validate_distribution(&x[self.action_range()])?)
    }
}

/// Maps an integer in `0..period` onto the unit circle:
/// `(sin(2 pi v / p), cos(2 pi v / p))`. Wrap-around neighbors stay close,
/// unlike a raw integer encoding.
pub fn encode_cyclic(value: u32, period: u32) -> Result<(f64, f64), RewardModelError> {
    if value >= period {
        return Err(RewardModelError::OutOfRange { value, period });
    }
    let angle = 2.0 * std::f64::consts::PI * value as f64 / period as f64;
    Ok((angle.sin(), angle.cos()))
}

fn decode_cyclic(sin: f64, cos: f64, period: u32) -> u32 {
    let angle = sin.atan2(cos).rem_euclid(2.0 * std::f64::consts::PI);
    let value = (angle / (2.0 * std::f64::consts::PI) * period as f64).round() as u32;
    value % period
}
