//! The four pipeline stages behind the CLI subcommands. Each stage is a
//! plain function over paths and the experiment config so integration
//! tests can drive them without spawning processes.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use calibrec_core::domain::{Catalog, LoggedTriplet};
use calibrec_core::jsonl::{read_jsonl, write_jsonl, JsonlError};
use calibrec_core::ope::{percentile, report_from_ratios, target_ratios, PolicyTarget};
use calibrec_core::policy::{
    ActionSet, CbPolicy, GaussianPolicy, MbPolicy, Policy, ScPolicy, UniformPolicy,
};
use calibrec_core::reward_model::{train, TrainedModel};
use calibrec_core::simulator::{
    run_ab, run_logging_with, EpisodeRecord, OraclePolicy, RunLog, SimConfig,
};
use calibrec_core::validate_distribution;

use crate::config::{ExperimentConfig, LoggingConfig, PolicyConfig, PolicyKind};
use crate::error::CliError;

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn actions_of(config: &ExperimentConfig) -> ActionSet {
    ActionSet::podcast_grid(config.actions.grid_points)
}

fn logging_policy(config: &ExperimentConfig, actions: &ActionSet) -> Box<dyn Policy> {
    match &config.logging {
        LoggingConfig::Uniform => Box::new(UniformPolicy { actions: actions.clone() }),
        LoggingConfig::Gaussian { sigma, window_days } => Box::new(GaussianPolicy {
            actions: actions.clone(),
            sigma: *sigma,
            window_days: *window_days,
        }),
    }
}

fn build_policy(
    decl: &PolicyConfig,
    actions: &ActionSet,
    sim: &SimConfig,
    model: Option<&TrainedModel>,
) -> Result<Box<dyn Policy>, CliError> {
    Ok(match &decl.kind {
        PolicyKind::Cb { epsilon, explorer } => {
            let model = model.ok_or_else(|| {
                CliError::Config(format!("policy {:?} needs a trained checkpoint", decl.name))
            })?;
            Box::new(
                CbPolicy::new(actions.clone(), model.clone(), *epsilon, explorer.clone())
                    .map_err(|e| CliError::Config(e.to_string()))?,
            )
        }
        PolicyKind::Sc { window_days } => {
            Box::new(ScPolicy { actions: actions.clone(), window_days: *window_days })
        }
        PolicyKind::Mb { business_dist } => Box::new(MbPolicy {
            actions: actions.clone(),
            business_dist: validate_distribution(business_dist)
                .map_err(|e| CliError::Config(format!("policy {:?}: {e}", decl.name)))?,
        }),
        PolicyKind::Uniform => Box::new(UniformPolicy { actions: actions.clone() }),
        PolicyKind::Oracle => {
            Box::new(OraclePolicy { actions: actions.clone(), cohorts: sim.cohorts.clone() })
        }
        PolicyKind::Gaussian { sigma, window_days } => Box::new(GaussianPolicy {
            actions: actions.clone(),
            sigma: *sigma,
            window_days: *window_days,
        }),
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateMetadata {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub logging_policy: String,
    pub start_epoch_day: i64,
    pub train_days: u32,
    pub horizon_days: u32,
    pub train_triplets: usize,
    pub eval_triplets: usize,
}

#[derive(Debug)]
pub struct SimulateSummary {
    pub out_dir: PathBuf,
    pub metadata: SimulateMetadata,
    pub eval_split_empty: bool,
}

pub fn cmd_simulate(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<SimulateSummary, CliError> {
    let mut sim = config.sim.clone();
    if let Some(seed) = seed_override {
        sim.seed = seed;
    }
    let out_dir = out_override.unwrap_or_else(|| config.output_dir.clone());
    ensure_dir(&out_dir)?;

    let actions = actions_of(config);
    let policy = logging_policy(config, &actions);
    let spec = config.feature_spec();
    let log = run_logging_with(&sim, policy.as_ref(), &config.calibration, &spec, config.slate_mode)
        .map_err(CliError::runtime)?;
    let (train_split, eval_split) = log.split_at_day(sim.train_days);

    write_jsonl(out_dir.join("train_triplets.jsonl"), train_split.triplets.iter())
        .map_err(CliError::runtime)?;
    write_jsonl(out_dir.join("train_episodes.jsonl"), train_split.episodes.iter())
        .map_err(CliError::runtime)?;
    write_jsonl(out_dir.join("eval_triplets.jsonl"), eval_split.triplets.iter())
        .map_err(CliError::runtime)?;
    write_jsonl(out_dir.join("eval_episodes.jsonl"), eval_split.episodes.iter())
        .map_err(CliError::runtime)?;

    let metadata = SimulateMetadata {
        schema_version: crate::config::SCHEMA_VERSION,
        config_hash: config.config_hash()?,
        seed: sim.seed,
        logging_policy: policy.name(),
        start_epoch_day: sim.start_epoch_day,
        train_days: sim.train_days,
        horizon_days: sim.horizon_days,
        train_triplets: train_split.triplets.len(),
        eval_triplets: eval_split.triplets.len(),
    };
    let json = serde_json::to_string_pretty(&metadata).map_err(CliError::runtime)?;
    std::fs::write(out_dir.join("metadata.json"), json).map_err(CliError::runtime)?;

    let eval_split_empty = eval_split.triplets.is_empty();
    if eval_split_empty {
        eprintln!(
            "warning: horizon_days {} leaves the evaluation split empty (train_days {})",
            sim.horizon_days, sim.train_days
        );
    }
    Ok(SimulateSummary { out_dir, metadata, eval_split_empty })
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct TrainSummary {
    pub checkpoint: PathBuf,
    pub loss_csv: PathBuf,
    pub final_train_loss: f64,
    pub final_validation_loss: Option<f64>,
}

pub fn cmd_train(
    config: &ExperimentConfig,
    triplets_path: &Path,
    out_override: Option<PathBuf>,
) -> Result<TrainSummary, CliError> {
    let out_dir = out_override.unwrap_or_else(|| config.output_dir.clone());
    ensure_dir(&out_dir)?;

    let triplets: Vec<LoggedTriplet> = read_jsonl(triplets_path).map_err(data_error)?;
    for (i, t) in triplets.iter().enumerate() {
        t.validate().map_err(|e| {
            CliError::Data(format!("{}:{}: {e}", triplets_path.display(), i + 1))
        })?;
    }

    let spec = config.feature_spec();
    let (params, report) = train(&triplets, &spec, &config.train).map_err(data_error)?;
    let model = TrainedModel { feature_spec: spec, params };

    let checkpoint = out_dir.join("model.ckpt");
    model.save_to_path(&checkpoint).map_err(CliError::runtime)?;

    let loss_csv = out_dir.join("training_loss.csv");
    let mut csv = String::from("epoch,train_loss,validation_loss\n");
    for e in &report.epochs {
        let val = e.validation_loss.map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, val));
    }
    std::fs::write(&loss_csv, csv).map_err(CliError::runtime)?;

    let last = report.epochs.last().expect("at least one epoch");
    Ok(TrainSummary {
        checkpoint,
        loss_csv,
        final_train_loss: last.train_loss,
        final_validation_loss: last.validation_loss,
    })
}

fn data_error(err: impl std::fmt::Display) -> CliError {
    CliError::Data(err.to_string())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

/// One output row per (policy, cap).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRow {
    pub policy: String,
    pub cap: f64,
    pub ips_value: f64,
    pub capped_ips_value: f64,
    pub effective_sample_size: f64,
    pub clipped_fraction: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub podcast_p1: Option<f64>,
    pub music_p1: Option<f64>,
    pub overall_p1: f64,
    /// Relative lifts vs the configured baseline at the same cap, in
    /// percent; `None` on the baseline's own rows.
    pub value_lift_pct: Option<f64>,
    pub podcast_p1_lift_pct: Option<f64>,
    pub overall_p1_lift_pct: Option<f64>,
}

pub fn cmd_evaluate(
    config: &ExperimentConfig,
    triplets_path: &Path,
    episodes_path: &Path,
    checkpoint_path: &Path,
    out_override: Option<PathBuf>,
) -> Result<Vec<EvalRow>, CliError> {
    let out_dir = out_override.unwrap_or_else(|| config.output_dir.clone());
    ensure_dir(&out_dir)?;

    let triplets: Vec<LoggedTriplet> = read_jsonl(triplets_path).map_err(data_error)?;
    let episodes: Vec<EpisodeRecord> = read_jsonl(episodes_path).map_err(data_error)?;
    if triplets.is_empty() {
        return Err(CliError::Data("evaluation triplet file is empty".into()));
    }
    if triplets.len() != episodes.len() {
        return Err(CliError::Data(format!(
            "triplet count {} does not match episode count {}",
            triplets.len(),
            episodes.len()
        )));
    }
    let model = TrainedModel::load_from_path(checkpoint_path).map_err(data_error)?;
    let spec = config.feature_spec();
    if model.feature_spec != spec {
        return Err(CliError::Data(
            "checkpoint feature spec does not match the experiment config".into(),
        ));
    }

    let actions = actions_of(config);
    let catalog = Catalog::music_podcast();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for decl in &config.policies {
        let policy = build_policy(decl, &actions, &config.sim, Some(&model))?;
        let target = PolicyTarget { policy: policy.as_ref(), spec: &spec };
        // The target pmf per record is the expensive part; compute the
        // ratio profile once and reuse it across the cap sweep.
        let ratios = target_ratios(&triplets, &target, config.ope.min_propensity)
            .map_err(data_error)?;
        for &cap in &config.ope.cap_sweep {
            let ope_cfg = config.ope.ope_config(cap);
            let mut report = report_from_ratios(&triplets, &ratios, &ope_cfg).map_err(data_error)?;
            let weights = ratios.capped(cap);
            let precision =
                calibrec_core::ope::precision_at_1(&episodes, &weights, catalog.len())
                    .map_err(data_error)?;
            report.policy = decl.name.clone();
            report.precision = Some(precision.clone());
            rows.push(EvalRow {
                policy: decl.name.clone(),
                cap,
                ips_value: report.ips_value,
                capped_ips_value: report.capped_ips_value,
                effective_sample_size: report.effective_sample_size,
                clipped_fraction: report.clipped_fraction,
                ci_lower: report.ci_lower,
                ci_upper: report.ci_upper,
                podcast_p1: precision.per_content[1].precision,
                music_p1: precision.per_content[0].precision,
                overall_p1: precision.overall,
                value_lift_pct: None,
                podcast_p1_lift_pct: None,
                overall_p1_lift_pct: None,
            });
            reports.push(report);
        }
    }

    apply_lifts(&mut rows, &config.evaluate.baseline)?;

    let csv_path = out_dir.join("evaluation.csv");
    write_eval_csv(&csv_path, &rows)?;
    let json_path = out_dir.join("evaluation.json");
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&reports).map_err(CliError::runtime)?,
    )
    .map_err(CliError::runtime)?;

    print_eval_table(&rows, config.ope.cap, &config.evaluate.baseline);
    Ok(rows)
}

fn apply_lifts(rows: &mut [EvalRow], baseline: &str) -> Result<(), CliError> {
    let baselines: Vec<(f64, f64, Option<f64>, f64)> = rows
        .iter()
        .filter(|r| r.policy == baseline)
        .map(|r| (r.cap, r.capped_ips_value, r.podcast_p1, r.overall_p1))
        .collect();
    for row in rows.iter_mut() {
        if row.policy == baseline {
            continue;
        }
        let Some(&(_, base_value, base_pod, base_overall)) =
            baselines.iter().find(|(cap, ..)| *cap == row.cap)
        else {
            continue;
        };
        row.value_lift_pct = relative_lift(row.capped_ips_value, base_value);
        row.podcast_p1_lift_pct = match (row.podcast_p1, base_pod) {
            (Some(v), Some(b)) => relative_lift(v, b),
            _ => None,
        };
        row.overall_p1_lift_pct = relative_lift(row.overall_p1, base_overall);
    }
    Ok(())
}

/// `(candidate - baseline) / baseline` as a signed percentage.
fn relative_lift(value: f64, baseline: f64) -> Option<f64> {
    if baseline == 0.0 {
        return None;
    }
    Some((value - baseline) / baseline * 100.0)
}

fn write_eval_csv(path: &Path, rows: &[EvalRow]) -> Result<(), CliError> {
    let mut out = String::from(
        "policy,cap,ips_value,capped_ips_value,effective_sample_size,clipped_fraction,\
         ci_lower,ci_upper,podcast_p1,music_p1,overall_p1,value_lift_pct,\
         podcast_p1_lift_pct,overall_p1_lift_pct\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.policy,
            r.cap,
            r.ips_value,
            r.capped_ips_value,
            r.effective_sample_size,
            r.clipped_fraction,
            r.ci_lower,
            r.ci_upper,
            opt(r.podcast_p1),
            opt(r.music_p1),
            r.overall_p1,
            opt(r.value_lift_pct),
            opt(r.podcast_p1_lift_pct),
            opt(r.overall_p1_lift_pct),
        ));
    }
    std::fs::write(path, out).map_err(CliError::runtime)
}

fn print_eval_table(rows: &[EvalRow], default_cap: f64, baseline: &str) {
    println!("offline evaluation (capped IPS, M = {default_cap}; lifts vs {baseline})");
    println!(
        "{:<10} {:>10} {:>13} {:>13} {:>10} {:>10} {:>10}",
        "policy", "value", "podcast P@1", "overall P@1", "Δvalue", "Δpodcast", "Δoverall"
    );
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    let fmt_lift = |v: Option<f64>| v.map(|x| format!("{x:+.1}%")).unwrap_or_else(|| "-".into());
    for r in rows.iter().filter(|r| r.cap == default_cap) {
        println!(
            "{:<10} {:>10.4} {:>13} {:>13.4} {:>10} {:>10} {:>10}",
            r.policy,
            r.capped_ips_value,
            fmt_opt(r.podcast_p1),
            r.overall_p1,
            fmt_lift(r.value_lift_pct),
            fmt_lift(r.podcast_p1_lift_pct),
            fmt_lift(r.overall_p1_lift_pct),
        );
    }
}

// ---------------------------------------------------------------------------
// abtest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmReport {
    pub policy: String,
    pub requests: usize,
    pub users: usize,
    pub engagement_rate: f64,
    pub podcast_engagement_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftReport {
    pub metric: String,
    pub lift_pct: f64,
    pub ci_lower_pct: f64,
    pub ci_upper_pct: f64,
    pub excludes_zero: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbtestReport {
    pub seed: u64,
    pub days: u32,
    pub aa_mode: bool,
    pub treatment: ArmReport,
    pub control: ArmReport,
    pub lifts: Vec<LiftReport>,
    pub total_requests: usize,
}

pub fn cmd_abtest(
    config: &ExperimentConfig,
    checkpoint_path: &Path,
    aa_mode: bool,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<AbtestReport, CliError> {
    let out_dir = out_override.unwrap_or_else(|| config.output_dir.clone());
    ensure_dir(&out_dir)?;

    let model = TrainedModel::load_from_path(checkpoint_path).map_err(data_error)?;
    let actions = actions_of(config);

    let treatment_name =
        if aa_mode { config.abtest.control.clone() } else { config.abtest.treatment.clone() };
    let control_name = config.abtest.control.clone();
    let find = |name: &str| {
        config
            .policies
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| CliError::Config(format!("policy {name:?} not declared")))
    };
    let treatment = build_policy(find(&treatment_name)?, &actions, &config.sim, Some(&model))?;
    let control = build_policy(find(&control_name)?, &actions, &config.sim, Some(&model))?;

    // Fresh traffic: the days after the logged horizon, under a new seed.
    let mut sim = config.sim.clone();
    sim.start_epoch_day += sim.horizon_days as i64;
    sim.horizon_days = config.abtest.days;
    sim.train_days = config.abtest.days;
    sim.seed = seed_override.unwrap_or(config.abtest.seed);

    let spec = config.feature_spec();
    let (t_log, c_log) = run_ab(&sim, treatment.as_ref(), control.as_ref(), &config.calibration, &spec)
        .map_err(CliError::runtime)?;

    let report = summarize_ab(
        &t_log,
        &c_log,
        &treatment_name,
        &control_name,
        sim.seed,
        config.abtest.days,
        aa_mode,
        config.abtest.bootstrap_resamples,
        config.abtest.ci_level,
    )?;

    std::fs::write(
        out_dir.join(if aa_mode { "aatest.json" } else { "abtest.json" }),
        serde_json::to_string_pretty(&report).map_err(CliError::runtime)?,
    )
    .map_err(CliError::runtime)?;

    print_ab_report(&report);
    Ok(report)
}

fn engagement(e: &EpisodeRecord) -> f64 {
    e.reward as f64
}

fn podcast_engagement(e: &EpisodeRecord) -> f64 {
    if e.reward == 1 && e.engaged_content == Some(1) {
        1.0
    } else {
        0.0
    }
}

#[allow(clippy::too_many_arguments)]
fn summarize_ab(
    t_log: &RunLog,
    c_log: &RunLog,
    treatment_name: &str,
    control_name: &str,
    seed: u64,
    days: u32,
    aa_mode: bool,
    resamples: usize,
    ci_level: f64,
) -> Result<AbtestReport, CliError> {
    if t_log.episodes.is_empty() || c_log.episodes.is_empty() {
        return Err(CliError::Runtime("an experiment arm received no traffic".into()));
    }
    let arm = |name: &str, log: &RunLog| ArmReport {
        policy: name.to_string(),
        requests: log.episodes.len(),
        users: per_user(log, engagement).len(),
        engagement_rate: mean(log, engagement),
        podcast_engagement_rate: mean(log, podcast_engagement),
    };
    let treatment = arm(treatment_name, t_log);
    let control = arm(control_name, c_log);

    let lifts = vec![
        lift_report("engagement_rate", t_log, c_log, engagement, resamples, seed, ci_level)?,
        lift_report(
            "podcast_engagement_rate",
            t_log,
            c_log,
            podcast_engagement,
            resamples,
            seed ^ 0x9e37,
            ci_level,
        )?,
    ];

    Ok(AbtestReport {
        seed,
        days,
        aa_mode,
        total_requests: treatment.requests + control.requests,
        treatment,
        control,
        lifts,
    })
}

fn mean(log: &RunLog, metric: impl Fn(&EpisodeRecord) -> f64) -> f64 {
    log.episodes.iter().map(&metric).sum::<f64>() / log.episodes.len() as f64
}

/// Per-user (count, metric sum) pairs, in first-seen order.
fn per_user(log: &RunLog, metric: impl Fn(&EpisodeRecord) -> f64) -> Vec<(f64, f64)> {
    let mut order: Vec<&str> = Vec::new();
    let mut index: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    let mut stats: Vec<(f64, f64)> = Vec::new();
    for e in &log.episodes {
        let i = *index.entry(e.user_id.as_str()).or_insert_with(|| {
            order.push(e.user_id.as_str());
            stats.push((0.0, 0.0));
            stats.len() - 1
        });
        stats[i].0 += 1.0;
        stats[i].1 += metric(e);
    }
    stats
}

/// User-level bootstrap CI of the relative lift between arms.
fn lift_report(
    metric_name: &str,
    t_log: &RunLog,
    c_log: &RunLog,
    metric: impl Fn(&EpisodeRecord) -> f64 + Copy,
    resamples: usize,
    seed: u64,
    ci_level: f64,
) -> Result<LiftReport, CliError> {
    let t_users = per_user(t_log, metric);
    let c_users = per_user(c_log, metric);
    let point_t = mean(t_log, metric);
    let point_c = mean(c_log, metric);
    if point_c == 0.0 {
        return Err(CliError::Runtime(format!("control {metric_name} is zero; lift undefined")));
    }
    let point = (point_t - point_c) / point_c * 100.0;

    let mut rng = StdRng::seed_from_u64(seed);
    let mut lifts = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mt = resample_mean(&t_users, &mut rng);
        let mc = resample_mean(&c_users, &mut rng);
        if mc > 0.0 {
            lifts.push((mt - mc) / mc * 100.0);
        }
    }
    if lifts.is_empty() {
        return Err(CliError::Runtime(format!("bootstrap of {metric_name} degenerate")));
    }
    lifts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - ci_level) / 2.0 * 100.0;
    let lo = percentile(&lifts, alpha);
    let hi = percentile(&lifts, 100.0 - alpha);
    Ok(LiftReport {
        metric: metric_name.to_string(),
        lift_pct: point,
        ci_lower_pct: lo,
        ci_upper_pct: hi,
        excludes_zero: lo > 0.0 || hi < 0.0,
    })
}

fn resample_mean(users: &[(f64, f64)], rng: &mut StdRng) -> f64 {
    let mut count = 0.0;
    let mut total = 0.0;
    for _ in 0..users.len() {
        let (n, s) = users[rng.gen_range(0..users.len())];
        count += n;
        total += s;
    }
    if count > 0.0 {
        total / count
    } else {
        0.0
    }
}

fn print_ab_report(report: &AbtestReport) {
    let mode = if report.aa_mode { "A/A control" } else { "A/B" };
    println!(
        "{mode} over {} fresh days (seed {}), {} requests total",
        report.days, report.seed, report.total_requests
    );
    for arm in [&report.treatment, &report.control] {
        println!(
            "  {:<10} {:>7} requests {:>6} users  engagement {:.4}  podcast engagement {:.4}",
            arm.policy, arm.requests, arm.users, arm.engagement_rate, arm.podcast_engagement_rate
        );
    }
    for lift in &report.lifts {
        println!(
            "  {:<24} {:+.2}%  CI [{:+.2}%, {:+.2}%]  {}",
            lift.metric,
            lift.lift_pct,
            lift.ci_lower_pct,
            lift.ci_upper_pct,
            if lift.excludes_zero { "excludes 0" } else { "contains 0" }
        );
    }
    let _ = std::io::stdout().flush();
}

impl From<JsonlError> for CliError {
    fn from(err: JsonlError) -> Self {
        match err {
            JsonlError::Parse { .. } => CliError::Data(err.to_string()),
            JsonlError::Encode(_) => CliError::Runtime(err.to_string()),
            JsonlError::Io(_) => CliError::Data(err.to_string()),
        }
    }
}
