//! Policies over the discrete action set of content-type distributions: the
//! stochastic logging policies used to collect feedback, the learned
//! epsilon-greedy bandit policy, and the deterministic historical-preference
//! and business-mix baselines.
//!
//! Every decision carries its exact selection probability, which is what
//! makes inverse-propensity evaluation of the logs possible later. Policies
//! are immutable; per-call randomness comes from an explicit seed, so
//! concurrent evaluation is race-free and replayable.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_distribution, ContentDistribution, UserContext};
use crate::reward_model::{RewardModelError, TrainedModel};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("action set must be non-empty, same-dimension, pairwise distinct")]
    InvalidActionSet,
    #[error("share-axis policies require a 2-type catalog, got {0} types")]
    UnsupportedCatalog(usize),
    #[error("sigma must be > 0, got {0}")]
    InvalidSigma(f64),
    #[error("epsilon must be in [0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("no trained model available for the bandit policy")]
    ModelNotTrained,
    #[error("action dimension {got} does not match context dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    RewardModel(#[from] RewardModelError),
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
}

/// The discrete action set `P`: candidate content-type distributions a
/// policy may prescribe as the slate's calibration target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSet {
    actions: Vec<ContentDistribution>,
}

impl ActionSet {
    pub fn new(actions: Vec<ContentDistribution>) -> Result<Self, PolicyError> {
        if actions.is_empty() {
            return Err(PolicyError::InvalidActionSet);
        }
        let dim = actions[0].len();
        for (i, a) in actions.iter().enumerate() {
            if a.len() != dim {
                return Err(PolicyError::InvalidActionSet);
            }
            if actions.iter().take(i).any(|other| other == a) {
                return Err(PolicyError::InvalidActionSet);
            }
        }
        Ok(Self { actions })
    }

    /// The default grid for a two-type catalog: podcast shares
    /// `0, 1/(points-1), ..., 1`, so 11 points gives `{0.0, 0.1, ..., 1.0}`.
    pub fn podcast_grid(points: usize) -> Self {
        assert!(points >= 2, "grid needs at least two points");
        let actions = (0..points)
            .map(|i| {
                let share = i as f64 / (points - 1) as f64;
                validate_distribution(&[1.0 - share, share]).expect("grid point is a distribution")
            })
            .collect();
        Self::new(actions).expect("grid is valid")
    }

    pub fn actions(&self) -> &[ContentDistribution] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, index: usize) -> &ContentDistribution {
        &self.actions[index]
    }

    /// Index of the action nearest to `dist` in L1 distance; exact ties go
    /// to the lower index.
    pub fn nearest(&self, dist: &ContentDistribution) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, a) in self.actions.iter().enumerate() {
            let d = a.l1_distance(dist);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Podcast share (index-1 mass) of every action; only defined for
    /// two-type catalogs.
    pub fn share_axis(&self) -> Result<Vec<f64>, PolicyError> {
        let dim = self.actions[0].len();
        if dim != 2 {
            return Err(PolicyError::UnsupportedCatalog(dim));
        }
        Ok(self.actions.iter().map(|a| a.get(1)).collect())
    }
}

/// A policy's chosen action together with the exact probability it had of
/// choosing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub action_index: usize,
    pub propensity: f64,
    pub exploring: bool,
}

/// A policy over the action set: a per-context selection pmf plus a seeded
/// sampler consistent with it.
pub trait Policy {
    fn name(&self) -> String;

    /// Exact selection probabilities over the action set in this context.
    fn pmf(&self, ctx: &UserContext) -> Result<Vec<f64>, PolicyError>;

    /// Samples a decision; `propensity` always equals `pmf(ctx)[action]`.
    fn decide(&self, ctx: &UserContext, seed: u64) -> Result<PolicyDecision, PolicyError>;

    fn action_set(&self) -> &ActionSet;
}

/// Inverse-CDF sample from a pmf.
fn sample_pmf(pmf: &[f64], rng: &mut StdRng) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    pmf.len() - 1
}

/// The user's historical target over a window: the consumption aggregate
/// when present, else the uniform prior (cold-start fallback).
pub fn context_target(ctx: &UserContext, window_days: u32, catalog_size: usize) -> ContentDistribution {
    ctx.aggregate(window_days)
        .and_then(|a| a.as_distribution())
        .unwrap_or_else(|| ContentDistribution::uniform(catalog_size))
}

/// Gaussian density over the grid's share axis, truncated to [0, 1] by
/// renormalizing the grid-point masses to sum 1. Closed-form propensities
/// are exactly the pmf entries.
pub fn gaussian_grid_pmf(center: f64, shares: &[f64], sigma: f64) -> Result<Vec<f64>, PolicyError> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(PolicyError::InvalidSigma(sigma));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let weights: Vec<f64> = shares.iter().map(|&g| (-(g - center) * (g - center) * inv).exp()).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(PolicyError::InvalidSigma(sigma));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

// ---------------------------------------------------------------------------
// Logging policies
// ---------------------------------------------------------------------------

/// Uniform exploration over the action set; every decision has propensity
/// `1 / |P|`.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    pub actions: ActionSet,
}

impl Policy for UniformPolicy {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn pmf(&self, _ctx: &UserContext) -> Result<Vec<f64>, PolicyError> {
        Ok(vec![1.0 / self.actions.len() as f64; self.actions.len()])
    }

    fn decide(&self, _ctx: &UserContext, seed: u64) -> Result<PolicyDecision, PolicyError> {
        let mut rng = StdRng::seed_from_u64(seed);
        let action_index = rng.gen_range(0..self.actions.len());
        Ok(PolicyDecision {
            action_index,
            propensity: 1.0 / self.actions.len() as f64,
            exploring: true,
        })
    }

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }
}

/// Exploration shaped around the user's historical preference: a Gaussian
/// on the share axis centered at the windowed target, renormalized over the
/// grid. Requires a two-type catalog.
#[derive(Debug, Clone)]
pub struct GaussianPolicy {
    pub actions: ActionSet,
    pub sigma: f64,
    pub window_days: u32,
}

impl GaussianPolicy {
    fn center(&self, ctx: &UserContext) -> f64 {
        context_target(ctx, self.window_days, 2).get(1)
    }
}

impl Policy for GaussianPolicy {
    fn name(&self) -> String {
        format!("gaussian(sigma={},window={}d)", self.sigma, self.window_days)
    }

    fn pmf(&self, ctx: &UserContext) -> Result<Vec<f64>, PolicyError> {
        let shares = self.actions.share_axis()?;
        gaussian_grid_pmf(self.center(ctx), &shares, self.sigma)
    }

    fn decide(&self, ctx: &UserContext, seed: u64) -> Result<PolicyDecision, PolicyError> {
        let pmf = self.pmf(ctx)?;
        let mut rng = StdRng::seed_from_u64(seed);
        let action_index = sample_pmf(&pmf, &mut rng);
        Ok(PolicyDecision { action_index, propensity: pmf[action_index], exploring: true })
    }

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }
}

// ---------------------------------------------------------------------------
// Learned bandit policy
// ---------------------------------------------------------------------------

/// How the epsilon fraction of traffic explores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ExplorerKind {
    Uniform,
    Gaussian { sigma: f64, window_days: u32 },
}

/// Epsilon-greedy over the reward model: exploit the predicted-engagement
/// argmax with probability `1 - epsilon`, otherwise sample the explorer.
/// The propensity accounts for the overlap when the explorer lands on the
/// greedy action: `(1 - eps) * 1{argmax} + eps * pmf_explorer`.
pub struct CbPolicy {
    pub actions: ActionSet,
    pub model: TrainedModel,
    pub epsilon: f64,
    pub explorer: ExplorerKind,
}

impl CbPolicy {
    pub fn new(
        actions: ActionSet,
        model: TrainedModel,
        epsilon: f64,
        explorer: ExplorerKind,
    ) -> Result<Self, PolicyError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(PolicyError::InvalidEpsilon(epsilon));
        }
        Ok(Self { actions, model, epsilon, explorer })
    }

    /// Argmax of predicted reward over the action set; ties go to the
    /// lowest action index.
    pub fn greedy_action(&self, ctx: &UserContext) -> Result<usize, PolicyError> {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, action) in self.actions.actions().iter().enumerate() {
            let score = self.model.predict(ctx, action)?;
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        Ok(best)
    }

    fn explorer_pmf(&self, ctx: &UserContext) -> Result<Vec<f64>, PolicyError> {
        match &self.explorer {
            ExplorerKind::Uniform => {
                Ok(vec![1.0 / self.actions.len() as f64; self.actions.len()])
            }
            ExplorerKind::Gaussian { sigma, window_days } => {
                let shares = self.actions.share_axis()?;
                let center = context_target(ctx, *window_days, 2).get(1);
                gaussian_grid_pmf(center, &shares, *sigma)
            }
        }
    }
}

impl Policy for CbPolicy {
    fn name(&self) -> String {
        "cb".into()
    }

    fn pmf(&self, ctx: &UserContext) -> Result<Vec<f64>, PolicyError> {
        let greedy = self.greedy_action(ctx)?;
        let explorer = self.explorer_pmf(ctx)?;
        Ok(explorer
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let exploit = if i == greedy { 1.0 - self.epsilon } else { 0.0 };
                exploit + self.epsilon * e
            })
            .collect())
    }

    fn decide(&self, ctx: &UserContext, seed: u64) -> Result<PolicyDecision, PolicyError> {
        let mut rng = StdRng::seed_from_u64(seed);
        let greedy = self.greedy_action(ctx)?;
        let explorer = self.explorer_pmf(ctx)?;
        let u: f64 = rng.gen();
        let (action_index, exploring) = if u < self.epsilon {
            (sample_pmf(&explorer, &mut rng), true)
        } else {
            (greedy, false)
        };
        let exploit = if action_index == greedy { 1.0 - self.epsilon } else { 0.0 };
        let propensity = exploit + self.epsilon * explorer[action_index];
        Ok(PolicyDecision { action_index, propensity, exploring })
    }

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }
}

// ---------------------------------------------------------------------------
// Deterministic baselines
// ---------------------------------------------------------------------------

/// Historical-preference calibration: deterministically plays the action
/// nearest the user's windowed consumption target; uniform fallback when
/// the window is empty.
#[derive(Debug, Clone)]
pub struct ScPolicy {
    pub actions: ActionSet,
    pub window_days: u32,
}

impl Policy for ScPolicy {
    fn name(&self) -> String {
        format!("sc{}", self.window_days)
    }

    fn pmf(&self, ctx: &UserContext) -> Result<Vec<f64>, PolicyError> {
        let dim = self.actions.get(0).len();
        let target = context_target(ctx, self.window_days, dim);
        let chosen = self.actions.nearest(&target);
        let mut pmf = vec![0.0; self.actions.len()];
        pmf[chosen] = 1.0;
        Ok(pmf)
    }

    fn decide(&self, ctx: &UserContext, _seed: u64) -> Result<PolicyDecision, PolicyError> {
        let dim = self.actions.get(0).len();
        let target = context_target(ctx, self.window_days, dim);
        Ok(PolicyDecision {
            action_index: self.actions.nearest(&target),
            propensity: 1.0,
            exploring: false,
        })
    }

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }
}

/// Fixed business mix: deterministically plays the action nearest a
/// configured target distribution, independent of the user.
#[derive(Debug, Clone)]
pub struct MbPolicy {
    pub actions: ActionSet,
    pub business_dist: ContentDistribution,
}

impl Policy for MbPolicy {
    fn name(&self) -> String {
        "mb".into()
    }

    fn pmf(&self, _ctx: &UserContext) -> Result<Vec<f64>, PolicyError> {
        let mut pmf = vec![0.0; self.actions.len()];
        pmf[self.actions.nearest(&self.business_dist)] = 1.0;
        Ok(pmf)
    }

    fn decide(&self, _ctx: &UserContext, _seed: u64) -> Result<PolicyDecision, PolicyError> {
        Ok(PolicyDecision {
            action_index: self.actions.nearest(&self.business_dist),
            propensity: 1.0,
            exploring: false,
        })
    }

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }
}
