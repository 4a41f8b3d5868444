//! Off-policy evaluation from logged triplets: inverse-propensity weighting
//! with probability-ratio capping, seeded bootstrap confidence intervals,
//! and off-policy Precision@1 over episode records.
//!
//! A target policy is anything that can state its selection pmf for the
//! context embedded in a logged feature vector. Ratios where the target
//! probability bit-equals the logged propensity short-circuit to exactly 1,
//! so self-evaluation of the logging policy reproduces the empirical mean
//! reward bit for bit.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::LoggedTriplet;
use crate::policy::{Policy, PolicyError};
use crate::reward_model::FeatureSpec;
use crate::simulator::EpisodeRecord;

#[derive(Debug, Error)]
pub enum OpeError {
    #[error("propensity {value} at record {index} is below the floor {floor}")]
    PropensityUnderflow { index: usize, value: f64, floor: f64 },
    #[error("target policy probability unavailable at record {index}: {reason}")]
    TargetProbabilityUnavailable { index: usize, reason: String },
    #[error("episode {index} carries no engaged-content ground truth")]
    MissingGroundTruth { index: usize },
    #[error("log is empty")]
    EmptyLog,
    #[error("weights length {weights} does not match episode count {episodes}")]
    WeightMismatch { weights: usize, episodes: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeConfig {
    /// Probability-ratio cap `M`.
    pub cap: f64,
    /// Records with logged propensity below this floor are rejected.
    pub min_propensity: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
}

impl Default for OpeConfig {
    fn default() -> Self {
        Self { cap: 10.0, min_propensity: 1e-4, bootstrap_resamples: 1000, bootstrap_seed: 99 }
    }
}

impl OpeConfig {
    pub fn validate(&self) -> Result<(), OpeError> {
        if self.cap < 1.0 || self.cap.is_nan() {
            return Err(OpeError::InvalidConfig("cap must be >= 1".into()));
        }
        if self.min_propensity <= 0.0 || self.min_propensity.is_nan() {
            return Err(OpeError::InvalidConfig("min_propensity must be > 0".into()));
        }
        Ok(())
    }
}

/// Hit rates of the rank-1 shelf against session engagement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    /// Per content type: (weighted hits, weighted impressions, precision).
    pub per_content: Vec<ContentPrecision>,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentPrecision {
    pub content_id: usize,
    pub weighted_hits: f64,
    pub weighted_impressions: f64,
    /// `None` when the policy never put this type at rank 1.
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeReport {
    pub policy: String,
    pub cap: f64,
    /// Plain IPS value, no capping.
    pub ips_value: f64,
    /// Capped-ratio IPS value; the headline estimate.
    pub capped_ips_value: f64,
    /// Kish effective sample size of the capped weights.
    pub effective_sample_size: f64,
    /// Fraction of records whose ratio exceeded the cap.
    pub clipped_fraction: f64,
    /// 2.5th/97.5th bootstrap percentiles of the capped estimate.
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub records: usize,
    pub precision: Option<PrecisionReport>,
}

/// A policy whose selection probabilities can be recovered for a logged
/// feature vector.
pub trait TargetPmf {
    fn name(&self) -> String;
    fn pmf_for_features(&self, x: &[f64]) -> Result<Vec<f64>, PolicyError>;
}

/// Adapts any [`Policy`] into a [`TargetPmf`] by decoding the context out
/// of the logged features. The decode/encode pair is exact, so recomputed
/// probabilities bit-match what the policy would have produced live.
pub struct PolicyTarget<'a> {
    pub policy: &'a dyn Policy,
    pub spec: &'a FeatureSpec,
}

impl TargetPmf for PolicyTarget<'_> {
    fn name(&self) -> String {
        self.policy.name()
    }

    fn pmf_for_features(&self, x: &[f64]) -> Result<Vec<f64>, PolicyError> {
        let ctx = self.spec.decode_context(x).map_err(PolicyError::from)?;
        self.policy.pmf(&ctx)
    }
}

/// Uncapped importance ratios `pi/mu` of a target policy over a log. The
/// expensive part of an estimate (the target pmf per record) happens here
/// once; reports for several caps can then reuse the profile.
pub struct TargetRatios {
    pub policy: String,
    pub raw: Vec<f64>,
}

pub fn target_ratios(
    logs: &[LoggedTriplet],
    target: &dyn TargetPmf,
    min_propensity: f64,
) -> Result<TargetRatios, OpeError> {
    let mut raw = Vec::with_capacity(logs.len());
    for (index, t) in logs.iter().enumerate() {
        if t.propensity < min_propensity {
            return Err(OpeError::PropensityUnderflow {
                index,
                value: t.propensity,
                floor: min_propensity,
            });
        }
        let pmf = target
            .pmf_for_features(&t.features)
            .map_err(|e| OpeError::TargetProbabilityUnavailable { index, reason: e.to_string() })?;
        let pi = *pmf
            .get(t.action_index)
            .ok_or_else(|| OpeError::TargetProbabilityUnavailable {
                index,
                reason: format!("action {} outside target pmf", t.action_index),
            })?;
        // Bit-equal probabilities mean "same policy"; force the ratio to an
        // exact 1 so self-evaluation is exact.
        let ratio = if pi.to_bits() == t.propensity.to_bits() { 1.0 } else { pi / t.propensity };
        raw.push(ratio);
    }
    Ok(TargetRatios { policy: target.name(), raw })
}

impl TargetRatios {
    /// Ratios clipped at `cap`, the weights behind the capped estimate and
    /// the off-policy precision metric.
    pub fn capped(&self, cap: f64) -> Vec<f64> {
        self.raw.iter().map(|&r| r.min(cap)).collect()
    }
}

/// Builds the report for one cap from a precomputed ratio profile.
pub fn report_from_ratios(
    logs: &[LoggedTriplet],
    ratios: &TargetRatios,
    cfg: &OpeConfig,
) -> Result<OpeReport, OpeError> {
    cfg.validate()?;
    if logs.is_empty() {
        return Err(OpeError::EmptyLog);
    }
    let k = logs.len() as f64;
    let mut ips_value = 0.0;
    let mut capped_value = 0.0;
    let mut weight_sum = 0.0;
    let mut weight_sq = 0.0;
    let mut clipped = 0usize;
    let mut contributions = Vec::with_capacity(logs.len());
    for (t, &r) in logs.iter().zip(&ratios.raw) {
        let reward = t.reward as f64;
        ips_value += reward * r;
        let c = r.min(cfg.cap);
        let contribution = reward * c;
        capped_value += contribution;
        contributions.push(contribution);
        weight_sum += c;
        weight_sq += c * c;
        if r > cfg.cap {
            clipped += 1;
        }
    }
    ips_value /= k;
    capped_value /= k;

    let (ci_lower, ci_upper) =
        bootstrap_ci(&contributions, cfg.bootstrap_resamples, cfg.bootstrap_seed);

    Ok(OpeReport {
        policy: ratios.policy.clone(),
        cap: cfg.cap,
        ips_value,
        capped_ips_value: capped_value,
        effective_sample_size: if weight_sq > 0.0 { weight_sum * weight_sum / weight_sq } else { 0.0 },
        clipped_fraction: clipped as f64 / k,
        ci_lower,
        ci_upper,
        records: logs.len(),
        precision: None,
    })
}

/// Capped inverse-propensity estimate of a target policy's value:
/// `(1/K) * sum_k r_k * min(M, pi(a_k|x_k) / mu(a_k|x_k))`, with the
/// uncapped value, clipped fraction, effective sample size, and a seeded
/// bootstrap CI.
pub fn ips_estimate(
    logs: &[LoggedTriplet],
    target: &dyn TargetPmf,
    cfg: &OpeConfig,
) -> Result<OpeReport, OpeError> {
    cfg.validate()?;
    if logs.is_empty() {
        return Err(OpeError::EmptyLog);
    }
    let ratios = target_ratios(logs, target, cfg.min_propensity)?;
    report_from_ratios(logs, &ratios, cfg)
}

/// Capped ratios for precision weighting (1 per record, same capping as the
/// value estimate).
pub fn capped_ratios(
    logs: &[LoggedTriplet],
    target: &dyn TargetPmf,
    cfg: &OpeConfig,
) -> Result<Vec<f64>, OpeError> {
    Ok(target_ratios(logs, target, cfg.min_propensity)?.capped(cfg.cap))
}

fn bootstrap_ci(contributions: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    if resamples == 0 {
        let mean = contributions.iter().sum::<f64>() / contributions.len() as f64;
        return (mean, mean);
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let n = contributions.len();
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut total = 0.0;
        for _ in 0..n {
            total += contributions[rng.gen_range(0..n)];
        }
        means.push(total / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (percentile(&means, 2.5), percentile(&means, 97.5))
}

/// Linear-interpolation percentile of an already-sorted slice.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Weighted Precision@1 over episode records: the rank-1 shelf's dominant
/// content type scores a hit when the user streamed that type in the
/// session. `weights` are the capped importance ratios of the target being
/// evaluated (all ones for on-policy reads).
pub fn precision_at_1(
    episodes: &[EpisodeRecord],
    weights: &[f64],
    num_content_types: usize,
) -> Result<PrecisionReport, OpeError> {
    if episodes.is_empty() {
        return Err(OpeError::EmptyLog);
    }
    if weights.len() != episodes.len() {
        return Err(OpeError::WeightMismatch { weights: weights.len(), episodes: episodes.len() });
    }
    let mut hits = vec![0.0; num_content_types];
    let mut impressions = vec![0.0; num_content_types];
    let mut overall_hits = 0.0;
    let mut overall_weight = 0.0;
    for (index, (e, &w)) in episodes.iter().zip(weights).enumerate() {
        let engaged = e.engaged_content.ok_or(OpeError::MissingGroundTruth { index })?;
        let predicted = e.rank1_content;
        let hit = if engaged == predicted { 1.0 } else { 0.0 };
        if predicted < num_content_types {
            impressions[predicted] += w;
            hits[predicted] += w * hit;
        }
        overall_weight += w;
        overall_hits += w * hit;
    }
    let per_content = (0..num_content_types)
        .map(|content_id| ContentPrecision {
            content_id,
            weighted_hits: hits[content_id],
            weighted_impressions: impressions[content_id],
            precision: if impressions[content_id] > 0.0 {
                Some(hits[content_id] / impressions[content_id])
            } else {
                None
            },
        })
        .collect();
    Ok(PrecisionReport {
        per_content,
        overall: if overall_weight > 0.0 { overall_hits / overall_weight } else { 0.0 },
    })
}
