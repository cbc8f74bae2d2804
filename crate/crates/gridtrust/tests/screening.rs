//! Safety properties of consensus screening: honest pools stay unflagged,
//! outnumbered rank inverters never escape.

use std::collections::BTreeSet;

use gridtrust::id::EntityId;
use gridtrust::ledger::{InteractionRecord, Ledger, Timestamp};
use gridtrust::purge::{detect_untrustworthy, PurgePolicy};
use gridtrust::rng::DeterministicRng;

const SCALE_MAX: f64 = 3.0;

/// Ten subject qualities spread across the scale.
fn ground_truth() -> Vec<(EntityId, f64)> {
    (0..10)
        .map(|i| (EntityId::new(format!("s{i}")), 0.2 + 0.28 * i as f64))
        .collect()
}

/// Builds a ledger where every rater scores every subject once: honest raters
/// report truth plus Gaussian noise, inverters report the reversed scale.
fn build_pool(
    honest: usize,
    inverters: usize,
    noise_sigma: f64,
    seed: u64,
) -> (Ledger, BTreeSet<EntityId>, BTreeSet<EntityId>) {
    let truth = ground_truth();
    let mut ledger = Ledger::new(SCALE_MAX);
    let mut rng = DeterministicRng::seed_from(seed);
    let mut pool = BTreeSet::new();
    let mut bad = BTreeSet::new();
    for r in 0..honest + inverters {
        let rater = EntityId::new(format!("r{r:02}"));
        let invert = r >= honest;
        if invert {
            bad.insert(rater.clone());
        }
        pool.insert(rater.clone());
        for (subject, quality) in &truth {
            let rating = if invert {
                SCALE_MAX - quality
            } else {
                rng.gaussian(*quality, noise_sigma).clamp(0.0, SCALE_MAX)
            };
            ledger
                .record_interaction(InteractionRecord {
                    initiator: rater.clone(),
                    provider: subject.clone(),
                    time: Timestamp::months(0.1).unwrap(),
                    outcome_rating: rating,
                    accepted: true,
                })
                .unwrap();
        }
    }
    (ledger, pool, bad)
}

#[test]
fn honest_pools_rarely_flag_anyone() {
    // Noise at 0.1 * scale maximum.
    let policy = PurgePolicy::default();
    let mut runs_with_flags = 0;
    for seed in 0..100 {
        let (ledger, pool, _) = build_pool(12, 0, 0.1 * SCALE_MAX, 1000 + seed);
        let flagged =
            detect_untrustworthy(&ledger, &pool, &policy, Timestamp::months(1.0).unwrap()).unwrap();
        if !flagged.is_empty() {
            runs_with_flags += 1;
        }
    }
    assert!(
        runs_with_flags <= 5,
        "honest pools were flagged in {runs_with_flags}/100 runs"
    );
}

#[test]
fn outnumbered_inverters_are_always_flagged() {
    let policy = PurgePolicy::default();
    for (honest, inverters) in [(3, 1), (6, 2), (9, 3), (13, 2)] {
        for seed in 0..25 {
            let (ledger, pool, bad) = build_pool(honest, inverters, 0.2, 2000 + seed);
            let flagged =
                detect_untrustworthy(&ledger, &pool, &policy, Timestamp::months(1.0).unwrap())
                    .unwrap();
            assert!(
                flagged.is_superset(&bad),
                "{honest}h/{inverters}i seed {seed}: flagged {flagged:?}, expected {bad:?}"
            );
        }
    }
}

#[test]
fn detection_only_reads_the_ledger() {
    let policy = PurgePolicy::default();
    let (ledger, pool, bad) = build_pool(9, 3, 0.2, 77);
    let at = Timestamp::months(1.0).unwrap();
    let first = detect_untrustworthy(&ledger, &pool, &policy, at).unwrap();
    let second = detect_untrustworthy(&ledger, &pool, &policy, at).unwrap();
    assert_eq!(first, second);
    assert_eq!(first, bad);
}
