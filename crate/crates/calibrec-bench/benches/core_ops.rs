//! Benchmarks for the hot paths: slate construction, the KL objective,
//! reward-model inference, and the IPS fold.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use calibrec_core::calibration::{
    empirical_distribution, greedy_construct, kl_divergence, CalibrationConfig, RankWeighting,
};
use calibrec_core::domain::{
    validate_distribution, LoggedTriplet, Shelf, Slate, UserContext,
    WindowAggregate,
};
use calibrec_core::ope::{ips_estimate, OpeConfig, PolicyTarget};
use calibrec_core::policy::{ActionSet, ScPolicy};
use calibrec_core::reward_model::{FeatureSpec, ForwardMode, MlpParams};

fn candidate_pool(rng: &mut StdRng, n: usize) -> Vec<Shelf> {
    (0..n)
        .map(|i| {
            let a: f64 = rng.gen();
            Shelf::new(
                format!("c{i:02}"),
                rng.gen::<f64>(),
                validate_distribution(&[1.0 - a, a]).unwrap(),
            )
            .unwrap()
        })
        .collect()
}

fn bench_greedy_construct(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(1);
    let candidates = candidate_pool(&mut rng, 20);
    let target = validate_distribution(&[0.6, 0.4]).unwrap();
    let cfg = CalibrationConfig::default();
    c.bench_function("greedy_construct_20c_n5", |b| {
        b.iter(|| greedy_construct(black_box(&candidates), black_box(&target), &cfg).unwrap())
    });
}

fn bench_kl_and_empirical(c: &mut Criterion) {
    let p = validate_distribution(&[0.3, 0.7]).unwrap();
    let q = validate_distribution(&[0.55, 0.45]).unwrap();
    c.bench_function("kl_divergence_c2", |b| {
        b.iter(|| kl_divergence(black_box(&p), black_box(&q), 0.01).unwrap())
    });

    let mut rng = StdRng::seed_from_u64(2);
    let shelves = candidate_pool(&mut rng, 5);
    let slate = Slate::new(shelves, RankWeighting::Mrr.weights(5)).unwrap();
    c.bench_function("empirical_distribution_n5", |b| {
        b.iter(|| empirical_distribution(black_box(&slate)).unwrap())
    });
}

fn bench_spec() -> FeatureSpec {
    FeatureSpec::new(
        2,
        vec![7, 30, 90],
        vec!["US".into(), "SE".into(), "GB".into()],
        vec!["mobile".into(), "desktop".into()],
        3,
        4,
    )
}

fn bench_context(rng: &mut StdRng) -> UserContext {
    let a: f64 = rng.gen();
    UserContext {
        user_id: "u".into(),
        cohort_id: rng.gen_range(0..3),
        country: "SE".into(),
        device: "mobile".into(),
        hour_of_day: rng.gen_range(0..24),
        day_of_week: rng.gen_range(0..7),
        consumption_aggregates: vec![
            WindowAggregate { window_days: 7, mass: vec![1.0 - a, a] },
            WindowAggregate { window_days: 30, mass: vec![1.0 - a, a] },
            WindowAggregate { window_days: 90, mass: vec![1.0 - a, a] },
        ],
    }
}

fn bench_forward(c: &mut Criterion) {
    let spec = bench_spec();
    let params = MlpParams::init(&spec, 0.1, 7);
    let mut rng = StdRng::seed_from_u64(3);
    let ctx = bench_context(&mut rng);
    let action = validate_distribution(&[0.7, 0.3]).unwrap();
    let x = spec.encode(&ctx, &action).unwrap();
    c.bench_function("mlp_forward_256x64", |b| {
        b.iter(|| params.forward(black_box(&x), ForwardMode::Eval).unwrap())
    });
    c.bench_function("encode_context_action", |b| {
        b.iter(|| spec.encode(black_box(&ctx), black_box(&action)).unwrap())
    });
}

fn synthetic_log(spec: &FeatureSpec, actions: &ActionSet, n: usize) -> Vec<LoggedTriplet> {
    let mut rng = StdRng::seed_from_u64(4);
    (0..n)
        .map(|i| {
            let ctx = bench_context(&mut rng);
            let action_index = rng.gen_range(0..actions.len());
            LoggedTriplet {
                features: spec.encode(&ctx, actions.get(action_index)).unwrap(),
                action_index,
                propensity: 1.0 / actions.len() as f64,
                reward: (rng.gen::<f64>() < 0.3) as u8,
                timestamp: i as i64,
            }
        })
        .collect()
}

fn bench_ips(c: &mut Criterion) {
    let spec = bench_spec();
    let actions = ActionSet::podcast_grid(11);
    let logs = synthetic_log(&spec, &actions, 10_000);
    let sc90 = ScPolicy { actions, window_days: 90 };
    let cfg = OpeConfig { bootstrap_resamples: 100, ..OpeConfig::default() };
    c.bench_function("ips_estimate_10k_sc90", |b| {
        b.iter_batched(
            || logs.clone(),
            |logs| {
                let target = PolicyTarget { policy: &sc90, spec: &spec };
                ips_estimate(black_box(&logs), &target, &cfg).unwrap()
            },
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(
    benches,
    bench_greedy_construct,
    bench_kl_and_empirical,
    bench_forward,
    bench_ips
);
criterion_main!(benches);
