//! Property tests over the domain invariants: lossless serialization,
//! idempotent validation, and non-negativity of the divergence.

use proptest::collection::vec;
use proptest::prelude::*;

use calibrec_core::calibration::kl_divergence;
use calibrec_core::domain::{
    validate_distribution, ContentDistribution, Interaction, LoggedTriplet, Shelf,
};

fn distribution(dim: usize) -> impl Strategy<Value = ContentDistribution> {
    vec(1e-9..1.0f64, dim).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        validate_distribution(&raw.iter().map(|r| r / total).collect::<Vec<_>>()).unwrap()
    })
}

proptest! {
    #[test]
    fn distribution_json_round_trip_is_lossless(d in (2usize..=6).prop_flat_map(distribution)) {
        let json = serde_json::to_string(&d).unwrap();
        let back: ContentDistribution = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(d, back);
    }

    #[test]
    fn shelf_json_round_trip_is_lossless(
        d in distribution(2),
        relevance in -1e6..1e6f64,
        id in "[a-z0-9-]{1,12}",
    ) {
        let shelf = Shelf::new(id, relevance, d).unwrap();
        let back: Shelf = serde_json::from_str(&serde_json::to_string(&shelf).unwrap()).unwrap();
        prop_assert_eq!(shelf, back);
    }

    #[test]
    fn interaction_json_round_trip_is_lossless(
        d in distribution(2),
        weight in 1e-6..1e6f64,
        ts in -1_000_000_000i64..4_000_000_000i64,
    ) {
        let interaction = Interaction::new(d, weight, ts).unwrap();
        let json = serde_json::to_string(&interaction).unwrap();
        let back: Interaction = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(interaction, back);
    }

    #[test]
    fn triplet_json_round_trip_is_lossless(
        features in vec(-1e3..1e3f64, 1..20),
        action_index in 0usize..11,
        propensity in 1e-6..=1.0f64,
        reward in 0u8..=1,
    ) {
        let triplet = LoggedTriplet { features, action_index, propensity, reward, timestamp: 0 };
        let json = serde_json::to_string(&triplet).unwrap();
        let back: LoggedTriplet = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(triplet, back);
    }

    #[test]
    fn validation_is_idempotent_on_noisy_vectors(
        raw in vec(0.0..1.0f64, 2..6),
        noise in -9e-7..9e-7f64,
    ) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let mut mass: Vec<f64> = raw.iter().map(|r| r / total).collect();
        mass[0] = (mass[0] + noise).max(0.0);
        if let Ok(first) = validate_distribution(&mass) {
            let second = validate_distribution(first.mass()).unwrap();
            prop_assert_eq!(first, second);
        }
    }

    #[test]
    fn kl_divergence_is_non_negative(
        dim in 2usize..=5,
        seed_p in vec(1e-9..1.0f64, 5),
        seed_q in vec(1e-9..1.0f64, 5),
        alpha in 0.0..=0.1f64,
    ) {
        let norm = |raw: &[f64]| {
            let total: f64 = raw.iter().sum();
            validate_distribution(&raw.iter().map(|r| r / total).collect::<Vec<_>>()).unwrap()
        };
        let p = norm(&seed_p[..dim]);
        let q = norm(&seed_q[..dim]);
        let kl = kl_divergence(&p, &q, alpha).unwrap();
        prop_assert!(kl >= 0.0);
        prop_assert_eq!(kl_divergence(&p, &p, 0.0).unwrap(), 0.0);
    }
}
