//! Core vocabulary types: content catalogs, probability vectors over content
//! types, shelves, slates, user contexts, and logged bandit feedback.
//!
//! Everything here is immutable after construction and validated on the way
//! in, so downstream math can assume the probabilistic invariants hold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance accepted on ingestion: vectors whose mass sums within
/// this distance of 1 are renormalized, anything further off is rejected.
pub const INGEST_TOLERANCE: f64 = 1e-6;

/// Post-validation tolerance: a validated distribution always sums to 1
/// within this bound.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Sums already within this distance of 1 are kept bit-for-bit, which makes
/// validation idempotent.
const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    #[error("distribution entry {index} is negative: {value}")]
    NegativeMass { index: usize, value: f64 },
    #[error("distribution mass sums to {sum}, outside the 1e-6 ingestion tolerance")]
    NotNormalized { sum: f64 },
    #[error("distribution entry {index} is not finite")]
    NonFiniteMass { index: usize },
    #[error("distribution has no entries")]
    EmptyMass,
    #[error("catalog ids must be dense 0..C-1 and labels unique")]
    InvalidCatalog,
    #[error("shelf relevance must be finite, got {0}")]
    NonFiniteRelevance(f64),
    #[error("slate is empty")]
    EmptySlate,
    #[error("slate has {shelves} shelves but {weights} weights")]
    WeightLengthMismatch { shelves: usize, weights: usize },
    #[error("rank weight {index} is not strictly positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("interaction weight must be > 0, got {0}")]
    NonPositiveInteractionWeight(f64),
    #[error("hour_of_day {0} out of range 0..24")]
    HourOutOfRange(u8),
    #[error("day_of_week {0} out of range 0..7")]
    DayOutOfRange(u8),
    #[error("propensity {0} outside (0, 1]")]
    InvalidPropensity(f64),
    #[error("reward {0} is not binary")]
    NonBinaryReward(u8),
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// One recommendable content type, e.g. "music" or "podcast".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentType {
    pub id: usize,
    pub label: String,
}

/// The set of content types a deployment ranks over. Ids are dense `0..C-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    types: Vec<ContentType>,
}

impl Catalog {
    pub fn new(types: Vec<ContentType>) -> Result<Self, DomainError> {
        if types.is_empty() {
            return Err(DomainError::InvalidCatalog);
        }
        for (i, t) in types.iter().enumerate() {
            if t.id != i {
                return Err(DomainError::InvalidCatalog);
            }
            if types.iter().take(i).any(|other| other.label == t.label) {
                return Err(DomainError::InvalidCatalog);
            }
        }
        Ok(Self { types })
    }

    /// The default two-type catalog. By convention index 1 is the podcast
    /// axis used throughout the share-grid policies.
    pub fn music_podcast() -> Self {
        Self::new(vec![
            ContentType { id: 0, label: "music".to_string() },
            ContentType { id: 1, label: "podcast".to_string() },
        ])
        .expect("static catalog is valid")
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[ContentType] {
        &self.types
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.types.get(id).map(|t| t.label.as_str())
    }
}

// ---------------------------------------------------------------------------
// ContentDistribution
// ---------------------------------------------------------------------------

/// A probability vector over the content types of a catalog.
///
/// Holds `p(c|i)`, `p(c|u)`, `q(c|I)` and bandit actions alike. Construction
/// goes through [`validate_distribution`], so every instance sums to 1 within
/// [`DISTRIBUTION_TOLERANCE`] and has only non-negative, finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRecord", into = "DistributionRecord")]
pub struct ContentDistribution {
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRecord {
    mass: Vec<f64>,
}

impl From<ContentDistribution> for DistributionRecord {
    fn from(d: ContentDistribution) -> Self {
        Self { mass: d.mass }
    }
}

impl TryFrom<DistributionRecord> for ContentDistribution {
    type Error = DomainError;

    fn try_from(raw: DistributionRecord) -> Result<Self, DomainError> {
        validate_distribution(&raw.mass)
    }
}

impl ContentDistribution {
    /// Uniform distribution over `c` types.
    pub fn uniform(c: usize) -> Self {
        assert!(c > 0, "catalog must be non-empty");
        Self { mass: vec![1.0 / c as f64; c] }
    }

    /// Point mass on a single content type.
    pub fn point_mass(c: usize, index: usize) -> Self {
        assert!(index < c, "point mass index out of range");
        let mut mass = vec![0.0; c];
        mass[index] = 1.0;
        Self { mass }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.mass[index]
    }

    /// L1 distance to another distribution of the same dimension.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Index of the dominant content type; ties resolve to the lower id.
    pub fn dominant(&self) -> usize {
        let mut best = 0;
        for (i, &m) in self.mass.iter().enumerate().skip(1) {
            if m > self.mass[best] {
                best = i;
            }
        }
        best
    }
}

/// Validates a raw mass vector into a [`ContentDistribution`].
///
/// Entries must be finite and non-negative. If the sum deviates from 1 by at
/// most [`INGEST_TOLERANCE`] the vector is renormalized (kept bit-identical
/// when already within 1e-12, which makes the operation idempotent);
/// anything further off is rejected.
pub fn validate_distribution(mass: &[f64]) -> Result<ContentDistribution, DomainError> {
    if mass.is_empty() {
        return Err(DomainError::EmptyMass);
    }
    for (index, &value) in mass.iter().enumerate() {
        if !value.is_finite() {
            return Err(DomainError::NonFiniteMass { index });
        }
        if value < 0.0 {
            return Err(DomainError::NegativeMass { index, value });
        }
    }
    let sum: f64 = mass.iter().sum();
    let deviation = (sum - 1.0).abs();
    if deviation > INGEST_TOLERANCE {
        return Err(DomainError::NotNormalized { sum });
    }
    let mass = if deviation <= EXACT_TOLERANCE {
        mass.to_vec()
    } else {
        mass.iter().map(|m| m / sum).collect()
    };
    Ok(ContentDistribution { mass })
}

// ---------------------------------------------------------------------------
// Shelf and Slate
// ---------------------------------------------------------------------------

/// A recommendable unit: a shelf with its predicted relevance score `s(i)`
/// and content-type makeup `p(c|i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shelf {
    pub shelf_id: String,
    pub relevance: f64,
    pub dist: ContentDistribution,
}

impl Shelf {
    pub fn new(
        shelf_id: impl Into<String>,
        relevance: f64,
        dist: ContentDistribution,
    ) -> Result<Self, DomainError> {
        if !relevance.is_finite() {
            return Err(DomainError::NonFiniteRelevance(relevance));
        }
        Ok(Self { shelf_id: shelf_id.into(), relevance, dist })
    }
}

/// An ordered list of shelves with strictly positive rank weights
/// `w_{r(i)}`; rank is the 1-based position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slate {
    shelves: Vec<Shelf>,
    weights: Vec<f64>,
}

impl Slate {
    pub fn new(shelves: Vec<Shelf>, weights: Vec<f64>) -> Result<Self, DomainError> {
        if shelves.is_empty() {
            return Err(DomainError::EmptySlate);
        }
        if shelves.len() != weights.len() {
            return Err(DomainError::WeightLengthMismatch {
                shelves: shelves.len(),
                weights: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if value <= 0.0 || !value.is_finite() {
                return Err(DomainError::NonPositiveWeight { index, value });
            }
        }
        Ok(Self { shelves, weights })
    }

    pub fn shelves(&self) -> &[Shelf] {
        &self.shelves
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.shelves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shelves.is_empty()
    }

    /// Sum of shelf relevance scores, `s(I)`.
    pub fn relevance_sum(&self) -> f64 {
        self.shelves.iter().map(|s| s.relevance).sum()
    }
}

// ---------------------------------------------------------------------------
// User context
// ---------------------------------------------------------------------------

/// Per-window share of stream time across content types. An all-zero mass
/// vector means the user has no history in that window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowAggregate {
    pub window_days: u32,
    pub mass: Vec<f64>,
}

impl WindowAggregate {
    pub fn empty(window_days: u32, catalog_size: usize) -> Self {
        Self { window_days, mass: vec![0.0; catalog_size] }
    }

    pub fn has_history(&self) -> bool {
        self.mass.iter().any(|&m| m != 0.0)
    }

    /// The aggregate as a distribution, or `None` when there is no history.
    pub fn as_distribution(&self) -> Option<ContentDistribution> {
        if self.has_history() {
            validate_distribution(&self.mass).ok()
        } else {
            None
        }
    }
}

/// Everything the reward model may see about a request: demographics,
/// behavioral aggregates, temporal signals, and device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserContext {
    pub user_id: String,
    pub cohort_id: u32,
    pub country: String,
    pub device: String,
    pub hour_of_day: u8,
    pub day_of_week: u8,
    pub consumption_aggregates: Vec<WindowAggregate>,
}

impl UserContext {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.hour_of_day >= 24 {
            return Err(DomainError::HourOutOfRange(self.hour_of_day));
        }
        if self.day_of_week >= 7 {
            return Err(DomainError::DayOutOfRange(self.day_of_week));
        }
        for agg in &self.consumption_aggregates {
            if agg.has_history() {
                validate_distribution(&agg.mass)?;
            }
        }
        Ok(())
    }

    pub fn aggregate(&self, window_days: u32) -> Option<&WindowAggregate> {
        self.consumption_aggregates
            .iter()
            .find(|a| a.window_days == window_days)
    }
}

// ---------------------------------------------------------------------------
// Interactions and logged feedback
// ---------------------------------------------------------------------------

/// One historical engagement: the shelf's content distribution and a
/// positive interaction strength `v_{u,i}` (e.g. stream seconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub shelf_dist: ContentDistribution,
    pub weight: f64,
    pub timestamp: i64,
}

impl Interaction {
    pub fn new(
        shelf_dist: ContentDistribution,
        weight: f64,
        timestamp: i64,
    ) -> Result<Self, DomainError> {
        if weight <= 0.0 || !weight.is_finite() {
            return Err(DomainError::NonPositiveInteractionWeight(weight));
        }
        Ok(Self { shelf_dist, weight, timestamp })
    }
}

/// The unit of bandit feedback: encoded context features, the chosen action
/// with its logging propensity, and the observed binary reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedTriplet {
    pub features: Vec<f64>,
    pub action_index: usize,
    pub propensity: f64,
    pub reward: u8,
    pub timestamp: i64,
}

impl LoggedTriplet {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.propensity > 0.0 && self.propensity <= 1.0) {
            return Err(DomainError::InvalidPropensity(self.propensity));
        }
        if self.reward > 1 {
            return Err(DomainError::NonBinaryReward(self.reward));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Time helpers
// ---------------------------------------------------------------------------

/// Derives `(hour_of_day, day_of_week)` from epoch seconds under a fixed
/// timezone offset. Day 0 is Sunday (the epoch began on a Thursday).
pub fn hour_and_day_of_week(timestamp: i64, tz_offset_secs: i32) -> (u8, u8) {
    let local = timestamp + tz_offset_secs as i64;
    let day = local.div_euclid(86_400);
    let secs_of_day = local.rem_euclid(86_400);
    let hour = (secs_of_day / 3600) as u8;
    let dow = (day + 4).rem_euclid(7) as u8;
    (hour, dow)
}
