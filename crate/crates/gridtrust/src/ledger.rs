//! Append-only record of transactions and the ratings they produced.
//!
//! The ledger is the single source of truth for activity, popularity and
//! rating-vector queries. Time is simulated and measured in months.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::id::EntityId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("timestamp must be a finite non-negative number of months (got {0})")]
    InvalidTime(f64),
    #[error("record at t={attempted} precedes the last recorded time t={last}")]
    TimeRegression { last: f64, attempted: f64 },
    #[error("initiator and provider must differ (got `{0}` on both sides)")]
    SelfInteraction(EntityId),
    #[error("rating {rating} outside [0, {max}]")]
    RatingOutOfRange { rating: f64, max: f64 },
    #[error("invalid window: from={from} exceeds to={to}")]
    InvalidWindow { from: f64, to: f64 },
}

/// Simulated time in months since the start of the scenario.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Timestamp(f64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0.0);

    pub fn months(value: f64) -> Result<Self, LedgerError> {
        if !value.is_finite() || value < 0.0 {
            return Err(LedgerError::InvalidTime(value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Months elapsed since `earlier`; negative if `earlier` is in the future.
    pub fn elapsed_since(self, earlier: Timestamp) -> f64 {
        self.0 - earlier.0
    }

    pub fn plus_months(self, months: f64) -> Result<Self, LedgerError> {
        Self::months(self.0 + months)
    }
}

/// One transaction attempt between two entities and the rating it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionRecord {
    pub initiator: EntityId,
    pub provider: EntityId,
    pub time: Timestamp,
    /// Rating the initiator recorded for the provider, in `[0, max_rating]`.
    pub outcome_rating: f64,
    /// Whether the transaction actually took place.
    pub accepted: bool,
}

/// A rater's latest stored score per subject, as of some point in time.
///
/// Subjects the rater never scored are absent, not zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingVector {
    rater: EntityId,
    scores: BTreeMap<EntityId, f64>,
    as_of: Timestamp,
}

impl RatingVector {
    pub fn new(rater: EntityId, as_of: Timestamp) -> Self {
        Self {
            rater,
            scores: BTreeMap::new(),
            as_of,
        }
    }

    pub fn rater(&self) -> &EntityId {
        &self.rater
    }

    pub fn as_of(&self) -> Timestamp {
        self.as_of
    }

    pub fn scores(&self) -> &BTreeMap<EntityId, f64> {
        &self.scores
    }

    pub fn score_of(&self, subject: &EntityId) -> Option<f64> {
        self.scores.get(subject).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn set_score(&mut self, subject: EntityId, score: f64) {
        assert_ne!(subject, self.rater, "rater cannot score itself");
        self.scores.insert(subject, score);
    }

    pub fn with_score(mut self, subject: impl Into<EntityId>, score: f64) -> Self {
        self.set_score(subject.into(), score);
        self
    }

    /// Subjects scored by both vectors.
    pub fn common_subjects(&self, other: &RatingVector) -> BTreeSet<EntityId> {
        self.scores
            .keys()
            .filter(|s| other.scores.contains_key(*s))
            .cloned()
            .collect()
    }
}

/// Append-only interaction ledger with non-decreasing timestamps.
#[derive(Clone, Debug, Default)]
pub struct Ledger {
    max_rating: f64,
    records: Vec<InteractionRecord>,
}

impl Ledger {
    pub fn new(max_rating: f64) -> Self {
        assert!(
            max_rating.is_finite() && max_rating > 0.0,
            "max rating must be positive"
        );
        Self {
            max_rating,
            records: Vec::new(),
        }
    }

    pub fn max_rating(&self) -> f64 {
        self.max_rating
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[InteractionRecord] {
        &self.records
    }

    pub fn last_time(&self) -> Option<Timestamp> {
        self.records.last().map(|r| r.time)
    }

    /// Appends a record. Timestamps must be non-decreasing; ties keep
    /// insertion order.
    pub fn record_interaction(&mut self, rec: InteractionRecord) -> Result<(), LedgerError> {
        if rec.initiator == rec.provider {
            return Err(LedgerError::SelfInteraction(rec.initiator));
        }
        if !rec.outcome_rating.is_finite()
            || rec.outcome_rating < 0.0
            || rec.outcome_rating > self.max_rating
        {
            return Err(LedgerError::RatingOutOfRange {
                rating: rec.outcome_rating,
                max: self.max_rating,
            });
        }
        if let Some(last) = self.last_time() {
            if rec.time < last {
                return Err(LedgerError::TimeRegression {
                    last: last.value(),
                    attempted: rec.time.value(),
                });
            }
        }
        self.records.push(rec);
        Ok(())
    }

    /// Records with `from <= time < to`, in ledger order.
    pub fn interactions_in_window(
        &self,
        from: Timestamp,
        to: Timestamp,
    ) -> Result<&[InteractionRecord], LedgerError> {
        if from > to {
            return Err(LedgerError::InvalidWindow {
                from: from.value(),
                to: to.value(),
            });
        }
        let start = self.records.partition_point(|r| r.time < from);
        let end = self.records.partition_point(|r| r.time < to);
        Ok(&self.records[start..end])
    }

    /// The rater's most recent rating for each subject in `subjects`, using
    /// accepted interactions with `time <= as_of`. Later records win ties.
    pub fn rating_vector_of(
        &self,
        rater: &EntityId,
        subjects: &BTreeSet<EntityId>,
        as_of: Timestamp,
    ) -> RatingVector {
        let mut vector = RatingVector::new(rater.clone(), as_of);
        for rec in &self.records {
            if rec.time > as_of {
                break;
            }
            if rec.accepted && &rec.initiator == rater && subjects.contains(&rec.provider) {
                vector
                    .scores
                    .insert(rec.provider.clone(), rec.outcome_rating);
            }
        }
        vector
    }

    /// Rating vector over every subject the rater has rated.
    pub fn rating_vector_full(&self, rater: &EntityId, as_of: Timestamp) -> RatingVector {
        let mut vector = RatingVector::new(rater.clone(), as_of);
        for rec in &self.records {
            if rec.time > as_of {
                break;
            }
            if rec.accepted && &rec.initiator == rater {
                vector
                    .scores
                    .insert(rec.provider.clone(), rec.outcome_rating);
            }
        }
        vector
    }
}
