//! Calibrated slate recommendation toolkit.
//!
//! Builds relevance/calibration-balanced slates by greedy optimization of a
//! combined objective, learns per-context content-type targets with a
//! contextual bandit over logged feedback, and evaluates policies offline
//! with capped inverse-propensity weighting — validated against a synthetic
//! user simulator with context-dependent preference drift.

pub mod calibration;
pub mod domain;
pub mod jsonl;
pub mod ope;
pub mod policy;
pub mod reward_model;
pub mod simulator;

pub use calibration::{
    brute_force_construct, empirical_distribution, greedy_construct, kl_divergence,
    slate_objective, steck_target, CalibrationConfig, CalibrationError, RankWeighting,
};
pub use domain::{
    validate_distribution, Catalog, ContentDistribution, ContentType, DomainError, Interaction,
    LoggedTriplet, Shelf, Slate, UserContext, WindowAggregate,
};
pub use ope::{ips_estimate, precision_at_1, OpeConfig, OpeError, OpeReport, PolicyTarget};
pub use policy::{
    ActionSet, CbPolicy, ExplorerKind, GaussianPolicy, MbPolicy, Policy, PolicyDecision,
    PolicyError, ScPolicy, UniformPolicy,
};
pub use reward_model::{
    gradient_check, train, FeatureSpec, MlpParams, RewardModelError, TrainConfig, TrainedModel,
};
pub use simulator::{
    engagement_probability, generate_requests, preferred_share, run_ab, run_logging,
    CohortProfile, EpisodeRecord, OraclePolicy, RunLog, SimConfig, SimError,
};
