//! Synthetic two-type environment: cohorts with daily/weekly podcast-share
//! cycles, per-user organic listening that drives rolling consumption
//! aggregates, candidate shelf pools, and Bernoulli slate engagement.
//!
//! Everything derives from the master seed through per-user sub-seeds, so
//! users could be simulated in parallel and still produce the dataset the
//! serial path produces. Reward draws are attached to requests, not
//! policies: two policies replayed over the same seed face identical
//! engagement coin flips, which makes paired comparisons sharp.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{
    empirical_distribution, greedy_construct, CalibrationConfig, CalibrationError, RankWeighting,
};
use crate::domain::{
    hour_and_day_of_week, validate_distribution, ContentDistribution, LoggedTriplet, Shelf, Slate,
    UserContext, WindowAggregate,
};
use crate::policy::{ActionSet, Policy, PolicyError};
use crate::reward_model::{FeatureSpec, RewardModelError};

const MUSIC: usize = 0;
const PODCAST: usize = 1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    RewardModel(#[from] RewardModelError),
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
}

/// One synthetic user population segment and its engagement behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortProfile {
    pub cohort_id: u32,
    pub base_podcast_share: f64,
    pub weekly_amplitude: f64,
    pub daily_amplitude: f64,
    pub weekly_phase: f64,
    pub daily_phase: f64,
    /// Decay rate of engagement in the slate-vs-preference mismatch.
    pub engagement_steepness: f64,
    /// Engagement probability at a perfect content-mix match.
    pub base_engagement: f64,
}

/// Requests per user per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum RequestRate {
    Fixed(u32),
    Poisson(f64),
}

impl RequestRate {
    fn sample(&self, rng: &mut StdRng) -> u32 {
        match self {
            RequestRate::Fixed(k) => *k,
            RequestRate::Poisson(lambda) => {
                // Knuth's method; fine for small rates.
                let threshold = (-lambda).exp();
                let mut k = 0u32;
                let mut p = 1.0;
                loop {
                    p *= rng.gen::<f64>();
                    if p <= threshold {
                        return k;
                    }
                    k += 1;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_users: usize,
    pub cohorts: Vec<CohortProfile>,
    pub candidates_per_request: usize,
    pub slate_size: usize,
    /// Simulated days of logged traffic.
    pub horizon_days: u32,
    /// Days 0..train_days feed the training split; the rest is evaluation.
    pub train_days: u32,
    pub requests_per_user_per_day: RequestRate,
    /// Organic listening history generated before day 0 so consumption
    /// windows are warm from the first request.
    pub burn_in_days: u32,
    /// Mean organic listening events per user per day (Poisson). Short
    /// windows see only a handful of events, so short-window preference
    /// estimates are materially noisier than long-window ones.
    pub organic_event_rate: f64,
    /// Rolling windows maintained per user, in days.
    pub aggregate_windows: Vec<u32>,
    /// Epoch day of simulated day 0 (3 = a Sunday).
    pub start_epoch_day: i64,
    pub countries: Vec<String>,
    pub devices: Vec<String>,
    /// Fraction of candidate shelves with mixed (non one-hot) content.
    pub mixed_shelf_fraction: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_users: 2000,
            cohorts: default_cohorts(),
            candidates_per_request: 20,
            slate_size: 5,
            horizon_days: 21,
            train_days: 14,
            requests_per_user_per_day: RequestRate::Fixed(2),
            burn_in_days: 90,
            organic_event_rate: 0.6,
            aggregate_windows: vec![7, 30, 90],
            start_epoch_day: 3,
            countries: vec![
                "US".into(),
                "SE".into(),
                "GB".into(),
                "DE".into(),
                "BR".into(),
                "JP".into(),
            ],
            devices: vec!["mobile".into(), "desktop".into(), "tablet".into(), "speaker".into()],
            mixed_shelf_fraction: 0.2,
            seed: 17,
        }
    }
}

/// Three synthetic cohorts with low/medium/high podcast affinity and
/// distinct weekly/daily phases.
pub fn default_cohorts() -> Vec<CohortProfile> {
    vec![
        CohortProfile {
            cohort_id: 0,
            base_podcast_share: 0.15,
            weekly_amplitude: 0.10,
            daily_amplitude: 0.10,
            weekly_phase: 0.0,
            daily_phase: 1.0,
            engagement_steepness: 3.0,
            base_engagement: 0.55,
        },
        CohortProfile {
            cohort_id: 1,
            base_podcast_share: 0.45,
            weekly_amplitude: 0.15,
            daily_amplitude: 0.20,
            weekly_phase: 2.1,
            daily_phase: 4.2,
            engagement_steepness: 3.0,
            base_engagement: 0.50,
        },
        CohortProfile {
            cohort_id: 2,
            base_podcast_share: 0.75,
            weekly_amplitude: 0.12,
            daily_amplitude: 0.15,
            weekly_phase: 4.2,
            daily_phase: 2.1,
            engagement_steepness: 3.0,
            base_engagement: 0.45,
        },
    ]
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_users == 0 {
            return Err(SimError::InvalidConfig("num_users must be > 0".into()));
        }
        if self.cohorts.is_empty() {
            return Err(SimError::InvalidConfig("at least one cohort required".into()));
        }
        if self.candidates_per_request < self.slate_size {
            return Err(SimError::InvalidConfig(
                "candidates_per_request must cover the slate size".into(),
            ));
        }
        if self.countries.is_empty() || self.devices.is_empty() {
            return Err(SimError::InvalidConfig("countries and devices must be non-empty".into()));
        }
        if self.organic_event_rate < 0.0 || !self.organic_event_rate.is_finite() {
            return Err(SimError::InvalidConfig("organic_event_rate must be >= 0".into()));
        }
        for c in &self.cohorts {
            if c.engagement_steepness <= 0.0 || !c.engagement_steepness.is_finite() {
                return Err(SimError::InvalidConfig("engagement_steepness must be > 0".into()));
            }
            if !(c.base_engagement > 0.0 && c.base_engagement < 1.0) {
                return Err(SimError::InvalidConfig("base_engagement must be in (0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn cohort(&self, cohort_id: u32) -> Option<&CohortProfile> {
        self.cohorts.iter().find(|c| c.cohort_id == cohort_id)
    }
}

/// Instantaneous preferred podcast share of a cohort: base plus weekly and
/// daily sinusoids, clamped to [0, 1].
pub fn preferred_share(cohort: &CohortProfile, hour: u8, day_of_week: u8) -> f64 {
    use std::f64::consts::PI;
    let weekly =
        cohort.weekly_amplitude * (2.0 * PI * day_of_week as f64 / 7.0 + cohort.weekly_phase).sin();
    let daily =
        cohort.daily_amplitude * (2.0 * PI * hour as f64 / 24.0 + cohort.daily_phase).sin();
    (cohort.base_podcast_share + weekly + daily).clamp(0.0, 1.0)
}

/// Ground-truth engagement probability: peaks at `base_engagement` when the
/// slate's podcast share matches the preference and decays exponentially in
/// the mismatch.
pub fn engagement_probability(
    cohort: &CohortProfile,
    slate_q: &ContentDistribution,
    preferred: f64,
) -> f64 {
    debug_assert_eq!(slate_q.len(), 2, "two-type catalogs only");
    let mismatch = (slate_q.get(PODCAST) - preferred).abs();
    cohort.base_engagement * (-cohort.engagement_steepness * mismatch).exp()
}

/// Policy-independent per-request ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestTruth {
    pub preferred_share: f64,
    /// Content type the user organically streams this session.
    pub engaged_content: usize,
    /// Uniform draw compared against the engagement probability.
    pub reward_draw: f64,
}

/// One simulated home-page request.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRequest {
    pub ctx: UserContext,
    pub candidates: Vec<Shelf>,
    pub day_index: u32,
    pub timestamp: i64,
    /// Seed the serving policy must use for this request.
    pub decide_seed: u64,
    pub truth: RequestTruth,
}

/// FNV-1a, used for stable user hashing (arm assignment, seed derivation).
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct OrganicEvent {
    timestamp: i64,
    content: usize,
    weight: f64,
}

/// Generates one user's full request series. Exposed mainly so tests can
/// replay single users; [`generate_requests`] streams all of them.
fn user_requests(cfg: &SimConfig, user_index: usize) -> Vec<SimRequest> {
    let user_seed = mix(cfg.seed, 0x5eed_0000 + user_index as u64);
    let mut profile_rng = StdRng::seed_from_u64(mix(user_seed, 0));
    let mut organic_rng = StdRng::seed_from_u64(mix(user_seed, 1));
    let mut request_rng = StdRng::seed_from_u64(mix(user_seed, 2));

    let user_id = format!("u{user_index:05}");
    let cohort = &cfg.cohorts[user_index % cfg.cohorts.len()];
    let country = cfg.countries[profile_rng.gen_range(0..cfg.countries.len())].clone();
    let device = cfg.devices[profile_rng.gen_range(0..cfg.devices.len())].clone();

    // Organic listening across burn-in and horizon; these events drive the
    // rolling aggregates and are independent of any serving policy.
    let mut events: Vec<OrganicEvent> = Vec::new();
    let first_day = -(cfg.burn_in_days as i64);
    let organic_rate = RequestRate::Poisson(cfg.organic_event_rate);
    for day in first_day..cfg.horizon_days as i64 {
        for _ in 0..organic_rate.sample(&mut organic_rng) {
            let hour: u8 = organic_rng.gen_range(0..24);
            let minute: i64 = organic_rng.gen_range(0..60);
            let timestamp = (cfg.start_epoch_day + day) * 86_400 + hour as i64 * 3600 + minute * 60;
            let (h, dow) = hour_and_day_of_week(timestamp, 0);
            let share = preferred_share(cohort, h, dow);
            let content = if organic_rng.gen::<f64>() < share { PODCAST } else { MUSIC };
            let weight = organic_rng.gen_range(30.0..600.0);
            events.push(OrganicEvent { timestamp, content, weight });
        }
    }
    events.sort_by_key(|e| e.timestamp);

    let mut requests = Vec::new();
    let mut seq: u64 = 0;
    for day in 0..cfg.horizon_days {
        let count = cfg.requests_per_user_per_day.sample(&mut request_rng);
        for _ in 0..count {
            let hour: u8 = request_rng.gen_range(0..24);
            let minute: i64 = request_rng.gen_range(0..60);
            let timestamp =
                (cfg.start_epoch_day + day as i64) * 86_400 + hour as i64 * 3600 + minute * 60;
            let (h, dow) = hour_and_day_of_week(timestamp, 0);

            let consumption_aggregates = cfg
                .aggregate_windows
                .iter()
                .map(|&w| window_aggregate(&events, timestamp, w))
                .collect();
            let ctx = UserContext {
                user_id: user_id.clone(),
                cohort_id: cohort.cohort_id,
                country: country.clone(),
                device: device.clone(),
                hour_of_day: h,
                day_of_week: dow,
                consumption_aggregates,
            };

            let candidates = candidate_pool(cfg, &mut request_rng, day, seq);
            let share = preferred_share(cohort, h, dow);
            let engaged_content =
                if request_rng.gen::<f64>() < share { PODCAST } else { MUSIC };
            let reward_draw: f64 = request_rng.gen();
            requests.push(SimRequest {
                ctx,
                candidates,
                day_index: day,
                timestamp,
                decide_seed: mix(user_seed, 0xdec1_de00 + seq),
                truth: RequestTruth { preferred_share: share, engaged_content, reward_draw },
            });
            seq += 1;
        }
    }
    requests.sort_by_key(|r| r.timestamp);
    requests
}

fn window_aggregate(events: &[OrganicEvent], now: i64, window_days: u32) -> WindowAggregate {
    let lo = now - window_days as i64 * 86_400;
    let mut mass = [0.0f64; 2];
    let mut total = 0.0;
    for e in events {
        if e.timestamp >= lo && e.timestamp < now {
            mass[e.content] += e.weight;
            total += e.weight;
        }
    }
    if total == 0.0 {
        return WindowAggregate::empty(window_days, 2);
    }
    let dist = validate_distribution(&[mass[0] / total, mass[1] / total])
        .expect("weighted shares form a distribution");
    WindowAggregate { window_days, mass: dist.mass().to_vec() }
}

fn candidate_pool(cfg: &SimConfig, rng: &mut StdRng, day: u32, seq: u64) -> Vec<Shelf> {
    (0..cfg.candidates_per_request)
        .map(|j| {
            let relevance: f64 = rng.gen();
            let roll: f64 = rng.gen();
            let dist = if roll < cfg.mixed_shelf_fraction {
                let a: f64 = rng.gen();
                validate_distribution(&[1.0 - a, a]).expect("mixed shelf")
            } else if roll < cfg.mixed_shelf_fraction + (1.0 - cfg.mixed_shelf_fraction) / 2.0 {
                ContentDistribution::point_mass(2, MUSIC)
            } else {
                ContentDistribution::point_mass(2, PODCAST)
            };
            Shelf::new(format!("d{day}-q{seq}-c{j:02}"), relevance, dist)
                .expect("relevance is finite")
        })
        .collect()
}

/// Streams every request of every user, in user order, deterministically
/// per seed.
pub fn generate_requests(cfg: &SimConfig) -> Result<RequestStream, SimError> {
    cfg.validate()?;
    Ok(RequestStream { cfg: cfg.clone(), next_user: 0, buffer: Vec::new() })
}

pub struct RequestStream {
    cfg: SimConfig,
    next_user: usize,
    /// Current user's remaining requests, reversed so `pop` yields them in
    /// timestamp order.
    buffer: Vec<SimRequest>,
}

impl Iterator for RequestStream {
    type Item = SimRequest;

    fn next(&mut self) -> Option<SimRequest> {
        loop {
            if let Some(item) = self.buffer.pop() {
                return Some(item);
            }
            if self.next_user >= self.cfg.num_users {
                return None;
            }
            self.buffer = user_requests(&self.cfg, self.next_user);
            self.buffer.reverse();
            self.next_user += 1;
        }
    }
}

/// Everything observed about one served request, for diagnostics and
/// ranking metrics; index-aligned with the triplet list of the same run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub user_id: String,
    pub cohort_id: u32,
    pub timestamp: i64,
    pub day_index: u32,
    pub action_index: usize,
    pub propensity: f64,
    pub exploring: bool,
    pub reward: u8,
    /// Ground-truth engagement probability of the realized slate.
    pub engagement_prob: f64,
    pub preferred_share: f64,
    /// Realized rank-weighted podcast share of the slate.
    pub slate_share: f64,
    /// Dominant content type of the rank-1 shelf.
    pub rank1_content: usize,
    /// Content type the user streamed this session.
    pub engaged_content: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub triplets: Vec<LoggedTriplet>,
    pub episodes: Vec<EpisodeRecord>,
}

impl RunLog {
    pub fn mean_reward(&self) -> f64 {
        if self.triplets.is_empty() {
            return 0.0;
        }
        self.triplets.iter().map(|t| t.reward as f64).sum::<f64>() / self.triplets.len() as f64
    }

    /// Splits into (before, from) by episode day index; triplets follow
    /// their aligned episodes.
    pub fn split_at_day(&self, day: u32) -> (RunLog, RunLog) {
        let mut before = RunLog::default();
        let mut after = RunLog::default();
        for (t, e) in self.triplets.iter().zip(&self.episodes) {
            let bucket = if e.day_index < day { &mut before } else { &mut after };
            bucket.triplets.push(t.clone());
            bucket.episodes.push(e.clone());
        }
        (before, after)
    }
}

/// How the slate is built from the chosen action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlateMode {
    /// Greedy optimization of the combined objective with the action as the
    /// calibration target.
    CalibratedGreedy,
    /// Literal sequential sampling of content types from the action,
    /// filling each position with the best remaining shelf of the drawn
    /// type (the blending baseline's original construction).
    SequentialSample,
}

/// Serves every request with `policy`, constructs the slate, draws the
/// Bernoulli engagement reward, and emits aligned triplets and episodes.
pub fn run_logging(
    cfg: &SimConfig,
    policy: &dyn Policy,
    calibration: &CalibrationConfig,
    feature_spec: &FeatureSpec,
) -> Result<RunLog, SimError> {
    run_logging_with(cfg, policy, calibration, feature_spec, SlateMode::CalibratedGreedy)
}

pub fn run_logging_with(
    cfg: &SimConfig,
    policy: &dyn Policy,
    calibration: &CalibrationConfig,
    feature_spec: &FeatureSpec,
    slate_mode: SlateMode,
) -> Result<RunLog, SimError> {
    let mut log = RunLog::default();
    for request in generate_requests(cfg)? {
        serve_request(cfg, policy, calibration, feature_spec, slate_mode, &request, &mut log)?;
    }
    Ok(log)
}

fn serve_request(
    cfg: &SimConfig,
    policy: &dyn Policy,
    calibration: &CalibrationConfig,
    feature_spec: &FeatureSpec,
    slate_mode: SlateMode,
    request: &SimRequest,
    log: &mut RunLog,
) -> Result<(), SimError> {
    let decision = policy.decide(&request.ctx, request.decide_seed)?;
    let action = policy.action_set().get(decision.action_index).clone();
    let slate = match slate_mode {
        SlateMode::CalibratedGreedy => {
            greedy_construct(&request.candidates, &action, calibration)?
        }
        SlateMode::SequentialSample => mb_sequential_slate(
            &request.candidates,
            &action,
            calibration.slate_size,
            calibration.rank_weighting,
            mix(request.decide_seed, 0x5e9),
        )?,
    };
    let q = empirical_distribution(&slate)?;
    let cohort = cfg
        .cohort(request.ctx.cohort_id)
        .ok_or_else(|| SimError::InvalidConfig(format!("unknown cohort {}", request.ctx.cohort_id)))?;
    let prob = engagement_probability(cohort, &q, request.truth.preferred_share);
    let reward = u8::from(request.truth.reward_draw < prob);
    let features = feature_spec.encode(&request.ctx, &action)?;

    log.triplets.push(LoggedTriplet {
        features,
        action_index: decision.action_index,
        propensity: decision.propensity,
        reward,
        timestamp: request.timestamp,
    });
    log.episodes.push(EpisodeRecord {
        user_id: request.ctx.user_id.clone(),
        cohort_id: request.ctx.cohort_id,
        timestamp: request.timestamp,
        day_index: request.day_index,
        action_index: decision.action_index,
        propensity: decision.propensity,
        exploring: decision.exploring,
        reward,
        engagement_prob: prob,
        preferred_share: request.truth.preferred_share,
        slate_share: q.get(PODCAST),
        rank1_content: slate.shelves()[0].dist.dominant(),
        engaged_content: Some(request.truth.engaged_content),
    });
    Ok(())
}

/// The blending baseline's literal construction: draw a content type per
/// position from the target distribution, then place the most relevant
/// remaining shelf of that type (best remaining overall if the type ran
/// out).
pub fn mb_sequential_slate(
    candidates: &[Shelf],
    target: &ContentDistribution,
    slate_size: usize,
    weighting: RankWeighting,
    seed: u64,
) -> Result<Slate, CalibrationError> {
    if candidates.len() < slate_size {
        return Err(CalibrationError::InsufficientCandidates {
            needed: slate_size,
            available: candidates.len(),
        });
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut used = vec![false; candidates.len()];
    let mut picked = Vec::with_capacity(slate_size);
    for _ in 0..slate_size {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        let mut wanted = target.len() - 1;
        for (c, &m) in target.mass().iter().enumerate() {
            cum += m;
            if u < cum {
                wanted = c;
                break;
            }
        }
        let pick = best_remaining(candidates, &used, Some(wanted))
            .or_else(|| best_remaining(candidates, &used, None))
            .expect("candidates remain");
        used[pick] = true;
        picked.push(candidates[pick].clone());
    }
    let weights = weighting.weights(picked.len());
    Ok(Slate::new(picked, weights)?)
}

fn best_remaining(candidates: &[Shelf], used: &[bool], wanted: Option<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, shelf) in candidates.iter().enumerate() {
        if used[i] {
            continue;
        }
        if let Some(c) = wanted {
            if shelf.dist.dominant() != c {
                continue;
            }
        }
        let better = match best {
            None => true,
            Some(b) => {
                let (sb, si) = (&candidates[b], shelf);
                si.relevance > sb.relevance
                    || (si.relevance == sb.relevance && si.shelf_id < sb.shelf_id)
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Plays the grid action nearest the cohort's instantaneous preferred
/// share: the best any policy can do on this environment up to grid
/// rounding. Needs the ground-truth cohort profiles, so it lives with the
/// simulator.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    pub actions: ActionSet,
    pub cohorts: Vec<CohortProfile>,
}

impl OraclePolicy {
    fn target_share(&self, ctx: &UserContext) -> f64 {
        self.cohorts
            .iter()
            .find(|c| c.cohort_id == ctx.cohort_id)
            .map(|c| preferred_share(c, ctx.hour_of_day, ctx.day_of_week))
            .unwrap_or(0.5)
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn pmf(&self, ctx: &UserContext) -> Result<Vec<f64>, PolicyError> {
        let share = self.target_share(ctx);
        let target = validate_distribution(&[1.0 - share, share])?;
        let mut pmf = vec![0.0; self.actions.len()];
        pmf[self.actions.nearest(&target)] = 1.0;
        Ok(pmf)
    }

    fn decide(&self, ctx: &UserContext, _seed: u64) -> Result<crate::policy::PolicyDecision, PolicyError> {
        let share = self.target_share(ctx);
        let target = validate_distribution(&[1.0 - share, share])?;
        Ok(crate::policy::PolicyDecision {
            action_index: self.actions.nearest(&target),
            propensity: 1.0,
            exploring: false,
        })
    }

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }
}

/// Runs a user-split A/B comparison over one request stream: users hash
/// into a stable arm and never switch. Returns (treatment log, control
/// log).
pub fn run_ab(
    cfg: &SimConfig,
    treatment: &dyn Policy,
    control: &dyn Policy,
    calibration: &CalibrationConfig,
    feature_spec: &FeatureSpec,
) -> Result<(RunLog, RunLog), SimError> {
    let mut t_log = RunLog::default();
    let mut c_log = RunLog::default();
    for request in generate_requests(cfg)? {
        let in_treatment = fnv1a(request.ctx.user_id.as_bytes()) & 1 == 0;
        if in_treatment {
            serve_request(
                cfg,
                treatment,
                calibration,
                feature_spec,
                SlateMode::CalibratedGreedy,
                &request,
                &mut t_log,
            )?;
        } else {
            serve_request(
                cfg,
                control,
                calibration,
                feature_spec,
                SlateMode::CalibratedGreedy,
                &request,
                &mut c_log,
            )?;
        }
    }
    Ok((t_log, c_log))
}
