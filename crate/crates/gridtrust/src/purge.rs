//! Screening of recommenders whose rankings diverge from pool consensus, and
//! the quarantine registry that keeps their reports out of aggregation.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::credibility::{kendall_similarity, CredibilityError, EvalCache, SimilarityMethod};
use crate::engine::RecommenderReport;
use crate::id::EntityId;
use crate::ledger::{Ledger, Timestamp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PurgeError {
    #[error(
        "insufficient population for consensus: {found} recommender(s), need at least {required}"
    )]
    InsufficientPopulation { found: usize, required: usize },
    #[error("invalid purge policy: {0}")]
    InvalidPolicy(String),
}

/// Smallest pool for which consensus screening is meaningful.
pub const MIN_SCREENING_POOL: usize = 3;

/// Screening thresholds and the quarantine duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurgePolicy {
    /// Flag a recommender whose mean pool similarity falls below this.
    pub similarity_threshold: f64,
    /// Peers count toward consensus only with at least this many commonly
    /// rated subjects.
    pub min_overlap: usize,
    pub quarantine_months: f64,
}

impl PurgePolicy {
    pub fn new(
        similarity_threshold: f64,
        min_overlap: usize,
        quarantine_months: f64,
    ) -> Result<Self, PurgeError> {
        if !(-1.0..=1.0).contains(&similarity_threshold) {
            return Err(PurgeError::InvalidPolicy(format!(
                "similarity threshold must lie in [-1, 1] (got {similarity_threshold})"
            )));
        }
        if min_overlap < 2 {
            return Err(PurgeError::InvalidPolicy(format!(
                "min overlap must be at least 2 (got {min_overlap})"
            )));
        }
        if !quarantine_months.is_finite() || quarantine_months <= 0.0 {
            return Err(PurgeError::InvalidPolicy(format!(
                "quarantine duration must be positive (got {quarantine_months})"
            )));
        }
        Ok(Self {
            similarity_threshold,
            min_overlap,
            quarantine_months,
        })
    }
}

impl Default for PurgePolicy {
    fn default() -> Self {
        Self {
            similarity_threshold: 0.0,
            min_overlap: 3,
            quarantine_months: 3.0,
        }
    }
}

/// One quarantine term for one entity.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarantineEntry {
    pub entity: EntityId,
    pub flagged_at: Timestamp,
    pub release_at: Timestamp,
    /// Mean consensus similarity at flag time.
    pub evidence: f64,
}

impl QuarantineEntry {
    /// Active over `[flagged_at, release_at)`.
    pub fn covers(&self, at: Timestamp) -> bool {
        self.flagged_at <= at && at < self.release_at
    }
}

/// Quarantine terms per entity, plus the full history for export.
#[derive(Clone, Debug, Default)]
pub struct QuarantineRegistry {
    current: BTreeMap<EntityId, QuarantineEntry>,
    history: Vec<QuarantineEntry>,
}

impl QuarantineRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_quarantined(&self, entity: &EntityId, at: Timestamp) -> bool {
        self.current.get(entity).is_some_and(|e| e.covers(at))
    }

    /// Opens a quarantine term for the entity, or returns the existing one if
    /// a term is already active at `now`. Re-flagging after release opens a
    /// fresh term.
    pub fn quarantine(
        &mut self,
        entity: &EntityId,
        evidence: f64,
        policy: &PurgePolicy,
        now: Timestamp,
    ) -> QuarantineEntry {
        if let Some(existing) = self.current.get(entity) {
            if existing.covers(now) {
                return existing.clone();
            }
        }
        let entry = QuarantineEntry {
            entity: entity.clone(),
            flagged_at: now,
            release_at: now
                .plus_months(policy.quarantine_months)
                .expect("policy duration is positive and finite"),
            evidence,
        };
        self.current.insert(entity.clone(), entry.clone());
        self.history.push(entry.clone());
        entry
    }

    /// Every term ever opened, in flag order.
    pub fn history(&self) -> &[QuarantineEntry] {
        &self.history
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

/// Mean rank similarity of the candidate's ratings against each qualifying
/// peer (those sharing at least `min_overlap` rated subjects). Neutral 0.0
/// when no peer qualifies.
pub fn consensus_similarity(
    ledger: &Ledger,
    candidate: &EntityId,
    peers: &BTreeSet<EntityId>,
    as_of: Timestamp,
    min_overlap: usize,
) -> f64 {
    let candidate_vec = ledger.rating_vector_full(candidate, as_of);
    let mut sum = 0.0;
    let mut count = 0usize;
    for peer in peers {
        if peer == candidate {
            continue;
        }
        let peer_vec = ledger.rating_vector_full(peer, as_of);
        if candidate_vec.common_subjects(&peer_vec).len() < min_overlap {
            continue;
        }
        match kendall_similarity(&candidate_vec, &peer_vec) {
            Ok(sim) => {
                sum += sim;
                count += 1;
            }
            Err(CredibilityError::InsufficientOverlap { .. }) => {}
            Err(_) => {}
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Consensus screening of a recommender pool.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Screening {
    /// Mean consensus similarity per pool member.
    pub consensus: BTreeMap<EntityId, f64>,
    pub flagged: BTreeSet<EntityId>,
}

fn flag_from_consensus(
    consensus: &BTreeMap<EntityId, f64>,
    policy: &PurgePolicy,
) -> BTreeSet<EntityId> {
    let flagged: BTreeSet<EntityId> = consensus
        .iter()
        .filter(|(_, &sim)| sim < policy.similarity_threshold)
        .map(|(e, _)| e.clone())
        .collect();
    // A flag set covering half the pool or more means there is no majority
    // consensus to stand on; equal factions flag nobody.
    if 2 * flagged.len() >= consensus.len() {
        return BTreeSet::new();
    }
    flagged
}

/// Screens every pool member against the rest of the pool. Fails when the
/// pool is too small for a consensus reference.
pub fn screen_recommenders(
    ledger: &Ledger,
    recommenders: &BTreeSet<EntityId>,
    policy: &PurgePolicy,
    now: Timestamp,
) -> Result<Screening, PurgeError> {
    if recommenders.len() < MIN_SCREENING_POOL {
        return Err(PurgeError::InsufficientPopulation {
            found: recommenders.len(),
            required: MIN_SCREENING_POOL,
        });
    }
    let mut consensus = BTreeMap::new();
    for candidate in recommenders {
        let mut peers = recommenders.clone();
        peers.remove(candidate);
        consensus.insert(
            candidate.clone(),
            consensus_similarity(ledger, candidate, &peers, now, policy.min_overlap),
        );
    }
    let flagged = flag_from_consensus(&consensus, policy);
    Ok(Screening { consensus, flagged })
}

/// Cached variant of [`screen_recommenders`] for simulation runs.
pub(crate) fn screen_recommenders_cached(
    cache: &EvalCache<'_>,
    recommenders: &BTreeSet<EntityId>,
    policy: &PurgePolicy,
) -> Result<Screening, PurgeError> {
    if recommenders.len() < MIN_SCREENING_POOL {
        return Err(PurgeError::InsufficientPopulation {
            found: recommenders.len(),
            required: MIN_SCREENING_POOL,
        });
    }
    let mut consensus = BTreeMap::new();
    for candidate in recommenders {
        let mut sum = 0.0;
        let mut count = 0usize;
        for peer in recommenders {
            if peer == candidate || cache.overlap(candidate, peer) < policy.min_overlap {
                continue;
            }
            sum += cache.similarity(SimilarityMethod::Kendall, candidate, peer);
            count += 1;
        }
        let mean = if count == 0 { 0.0 } else { sum / count as f64 };
        consensus.insert(candidate.clone(), mean);
    }
    let flagged = flag_from_consensus(&consensus, policy);
    Ok(Screening { consensus, flagged })
}

/// Recommenders whose consensus similarity falls below the policy threshold.
/// Deterministic for fixed inputs; a function of ledger state only.
pub fn detect_untrustworthy(
    ledger: &Ledger,
    recommenders: &BTreeSet<EntityId>,
    policy: &PurgePolicy,
    now: Timestamp,
) -> Result<BTreeSet<EntityId>, PurgeError> {
    Ok(screen_recommenders(ledger, recommenders, policy, now)?.flagged)
}

/// Drops reports from recommenders quarantined at `now`, preserving order.
pub fn filter_reports(
    reports: Vec<RecommenderReport>,
    registry: &QuarantineRegistry,
    now: Timestamp,
) -> Vec<RecommenderReport> {
    reports
        .into_iter()
        .filter(|r| !registry.is_quarantined(&r.recommender, now))
        .collect()
}
