//! Trust aggregation: direct experience blended with credibility-weighted
//! recommendations from the same domain and from other domains, with time
//! decay and threshold classification.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::credibility::{
    credibility, CredibilityWeights, EvalCache, SimilarityMethod, WEIGHT_SUM_TOLERANCE,
};
use crate::id::EntityId;
use crate::ledger::{Ledger, LedgerError, Timestamp};
use crate::purge::QuarantineRegistry;
use crate::topology::{RelationKind, Topology, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid rating scale: {0}")]
    InvalidScale(String),
    #[error("invalid aggregation weights: {0}")]
    InvalidWeights(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("learning rate must lie in [0, 1] (got {0})")]
    InvalidLearningRate(f64),
    #[error("activity window must be positive (got {0})")]
    InvalidWindow(f64),
    #[error("elapsed time must be non-negative (got {0})")]
    NegativeElapsed(f64),
    #[error("evaluator and subject must differ (got `{0}`)")]
    SelfEvaluation(EntityId),
    #[error("outcome rating {rating} outside [0, {max}]")]
    OutcomeOutOfRange { rating: f64, max: f64 },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Maximum reputation value μ; all ratings and reputations lie in `[0, μ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatingScale {
    mu: f64,
}

impl RatingScale {
    pub fn new(mu: f64) -> Result<Self, EngineError> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(EngineError::InvalidScale(format!(
                "maximum rating must be positive (got {mu})"
            )));
        }
        Ok(Self { mu })
    }

    pub fn max(&self) -> f64 {
        self.mu
    }

    pub fn midpoint(&self) -> f64 {
        self.mu / 2.0
    }

    pub fn contains(&self, value: f64) -> bool {
        value.is_finite() && (0.0..=self.mu).contains(&value)
    }
}

/// Default direct trust for a first impression: the midpoint of the scale.
pub fn initial_direct_trust(scale: &RatingScale) -> f64 {
    scale.midpoint()
}

/// Weights for direct trust, same-domain and other-domain recommendation
/// channels. Must sum to 1 and satisfy `w1 > w2 > w3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregationWeights {
    w1: f64,
    w2: f64,
    w3: f64,
}

impl AggregationWeights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self, EngineError> {
        for w in [w1, w2, w3] {
            if !w.is_finite() || w < 0.0 {
                return Err(EngineError::InvalidWeights(format!(
                    "weights must be non-negative (got {w1}, {w2}, {w3})"
                )));
            }
        }
        let sum = w1 + w2 + w3;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(EngineError::InvalidWeights(format!(
                "weights must sum to 1 (got {sum})"
            )));
        }
        if !(w1 > w2 && w2 > w3) {
            return Err(EngineError::InvalidWeights(format!(
                "weights must satisfy w1 > w2 > w3 (got {w1}, {w2}, {w3})"
            )));
        }
        Ok(Self { w1, w2, w3 })
    }

    pub fn values(&self) -> (f64, f64, f64) {
        (self.w1, self.w2, self.w3)
    }
}

impl Default for AggregationWeights {
    fn default() -> Self {
        Self {
            w1: 0.5,
            w2: 0.3,
            w3: 0.2,
        }
    }
}

/// How an evaluator treats scores between the two thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stance {
    Paranoid,
    Trusting,
}

/// Absolute trust (`eta`) and absolute mistrust (`xi`) thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub eta: f64,
    pub xi: f64,
    pub stance: Stance,
}

impl Thresholds {
    pub fn new(
        eta: f64,
        xi: f64,
        stance: Stance,
        scale: &RatingScale,
    ) -> Result<Self, EngineError> {
        if !eta.is_finite() || !xi.is_finite() {
            return Err(EngineError::InvalidThresholds(
                "thresholds must be finite".into(),
            ));
        }
        if xi < 0.0 {
            return Err(EngineError::InvalidThresholds(format!(
                "xi must be non-negative (got {xi})"
            )));
        }
        if eta <= xi {
            return Err(EngineError::InvalidThresholds(format!(
                "eta must exceed xi (got eta={eta}, xi={xi})"
            )));
        }
        if eta > scale.max() {
            return Err(EngineError::InvalidThresholds(format!(
                "eta must not exceed the maximum rating {} (got {eta})",
                scale.max()
            )));
        }
        Ok(Self { eta, xi, stance })
    }
}

/// Trust decision for a subject.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrustLabel {
    Trustworthy,
    Untrustworthy,
}

impl TrustLabel {
    pub fn as_yes_no(&self) -> &'static str {
        match self {
            TrustLabel::Trustworthy => "YES",
            TrustLabel::Untrustworthy => "NO",
        }
    }

    pub fn from_yes_no(s: &str) -> Option<Self> {
        match s {
            "YES" => Some(TrustLabel::Trustworthy),
            "NO" => Some(TrustLabel::Untrustworthy),
            _ => None,
        }
    }
}

impl fmt::Display for TrustLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_yes_no())
    }
}

/// Time-based decay coefficient with the stepped monthly schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFactor(f64);

impl DecayFactor {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Decay coefficient for an elapsed time in months:
/// `[0,1) → 1`, `[1,2) → 0.75`, `[2,3) → 0.5`, `[3,∞) → 0`.
pub fn tau_for_elapsed(delta_months: f64) -> Result<DecayFactor, EngineError> {
    if !delta_months.is_finite() || delta_months < 0.0 {
        return Err(EngineError::NegativeElapsed(delta_months));
    }
    let tau = if delta_months < 1.0 {
        1.0
    } else if delta_months < 2.0 {
        0.75
    } else if delta_months < 3.0 {
        0.5
    } else {
        0.0
    };
    Ok(DecayFactor(tau))
}

/// How a stored reputation ages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayMode {
    /// Pull the value toward the unknown-state default as it ages:
    /// `default + (value - default) * tau`.
    RevertToDefault,
    /// Push the value away from its initial value:
    /// `value + (value - initial) * tau`. Kept for comparison runs.
    Extrapolate,
}

/// One evaluator's stored reputation for one subject.
#[derive(Clone, Debug, PartialEq)]
pub struct ReputationRecord {
    pub evaluator: EntityId,
    pub subject: EntityId,
    pub value: f64,
    pub initial_value: f64,
    pub last_updated: Timestamp,
}

/// Applies the decay schedule to a stored reputation, clamped to the scale.
pub fn decay(
    rec: &ReputationRecord,
    now: Timestamp,
    default: f64,
    mode: DecayMode,
    scale: &RatingScale,
) -> Result<f64, EngineError> {
    let tau = tau_for_elapsed(now.elapsed_since(rec.last_updated))?.value();
    let decayed = match mode {
        DecayMode::RevertToDefault => default + (rec.value - default) * tau,
        DecayMode::Extrapolate => rec.value + (rec.value - rec.initial_value) * tau,
    };
    Ok(decayed.clamp(0.0, scale.max()))
}

/// Credibility-weighted mean of `(reputation, credibility)` reports.
///
/// Falls back to the midpoint default when no report carries weight, so an
/// empty channel never brands a subject untrustworthy by itself.
pub fn indirect_trust(reports: &[(f64, f64)], scale: &RatingScale) -> f64 {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for &(reputation, cred) in reports {
        if cred > 0.0 {
            weighted += cred * reputation;
            weight += cred;
        }
    }
    if weight <= 0.0 {
        return initial_direct_trust(scale);
    }
    weighted / weight
}

/// One recommender's contribution to an evaluation, kept for audit.
#[derive(Clone, Debug, PartialEq)]
pub struct RecommenderReport {
    pub recommender: EntityId,
    /// Decayed reputation the recommender reports for the subject.
    pub reported: f64,
    pub credibility: f64,
    pub relation: RelationKind,
}

/// Aggregated trust in a subject, with the per-channel terms retained.
#[derive(Clone, Debug, PartialEq)]
pub struct TrustScore {
    pub total: f64,
    pub dt: f64,
    pub itsd: f64,
    pub itod: f64,
    pub contributing: Vec<RecommenderReport>,
}

/// `total = w1*dt + w2*itsd + w3*itod`, clamped into the scale.
pub fn total_reputation(
    dt: f64,
    itsd: f64,
    itod: f64,
    weights: &AggregationWeights,
    scale: &RatingScale,
) -> TrustScore {
    let total = weights.w1 * dt + weights.w2 * itsd + weights.w3 * itod;
    TrustScore {
        total: total.clamp(0.0, scale.max()),
        dt,
        itsd,
        itod,
        contributing: Vec::new(),
    }
}

/// Threshold classification: `total >= eta` is trustworthy, `total <= xi` is
/// untrustworthy, and the band between them follows the evaluator's stance.
pub fn classify(score: &TrustScore, thresholds: &Thresholds) -> TrustLabel {
    if score.total >= thresholds.eta {
        TrustLabel::Trustworthy
    } else if score.total <= thresholds.xi {
        TrustLabel::Untrustworthy
    } else {
        match thresholds.stance {
            Stance::Trusting => TrustLabel::Trustworthy,
            Stance::Paranoid => TrustLabel::Untrustworthy,
        }
    }
}

/// Per-(evaluator, subject) reputation records, updated after transactions.
#[derive(Clone, Debug, Default)]
pub struct ReputationStore {
    records: BTreeMap<(EntityId, EntityId), ReputationRecord>,
}

impl ReputationStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, evaluator: &EntityId, subject: &EntityId) -> Option<&ReputationRecord> {
        self.records.get(&(evaluator.clone(), subject.clone()))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReputationRecord> {
        self.records.values()
    }

    /// Blends the outcome into the stored value:
    /// `new = (1 - alpha) * previous + alpha * outcome`.
    ///
    /// A fresh pair starts from the midpoint default, which is also kept as
    /// the record's initial value.
    pub fn update_after_transaction(
        &mut self,
        evaluator: &EntityId,
        subject: &EntityId,
        outcome_rating: f64,
        now: Timestamp,
        learning_rate: f64,
        scale: &RatingScale,
    ) -> Result<ReputationRecord, EngineError> {
        if evaluator == subject {
            return Err(EngineError::SelfEvaluation(evaluator.clone()));
        }
        if !(0.0..=1.0).contains(&learning_rate) {
            return Err(EngineError::InvalidLearningRate(learning_rate));
        }
        if !scale.contains(outcome_rating) {
            return Err(EngineError::OutcomeOutOfRange {
                rating: outcome_rating,
                max: scale.max(),
            });
        }
        let entry = self
            .records
            .entry((evaluator.clone(), subject.clone()))
            .or_insert_with(|| ReputationRecord {
                evaluator: evaluator.clone(),
                subject: subject.clone(),
                value: initial_direct_trust(scale),
                initial_value: initial_direct_trust(scale),
                last_updated: now,
            });
        entry.value = (1.0 - learning_rate) * entry.value + learning_rate * outcome_rating;
        entry.last_updated = now;
        Ok(entry.clone())
    }
}

/// All tunable parameters of one evaluation pipeline.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub scale: RatingScale,
    pub aggregation: AggregationWeights,
    pub credibility_weights: CredibilityWeights,
    /// Optional distinct weights for other-domain recommenders.
    pub credibility_weights_other: Option<CredibilityWeights>,
    pub thresholds: Thresholds,
    /// Blend rate for reputation updates after a transaction.
    pub learning_rate: f64,
    /// Length of the recent-activity window, in months.
    pub activity_window_months: f64,
    pub decay_mode: DecayMode,
    pub similarity: SimilarityMethod,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let scale = RatingScale::new(3.0).expect("static scale");
        Self {
            thresholds: Thresholds::new(2.2, 1.8, Stance::Paranoid, &scale)
                .expect("static thresholds"),
            scale,
            aggregation: AggregationWeights::default(),
            credibility_weights: CredibilityWeights::default(),
            credibility_weights_other: None,
            learning_rate: 0.5,
            activity_window_months: 1.0,
            decay_mode: DecayMode::RevertToDefault,
            similarity: SimilarityMethod::Kendall,
        }
    }
}

/// Read-only inputs for one evaluation.
pub struct EvalContext<'a> {
    pub topology: &'a Topology,
    pub ledger: &'a Ledger,
    pub store: &'a ReputationStore,
    pub quarantine: Option<&'a QuarantineRegistry>,
    pub now: Timestamp,
    pub cache: Option<&'a EvalCache<'a>>,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        topology: &'a Topology,
        ledger: &'a Ledger,
        store: &'a ReputationStore,
        now: Timestamp,
    ) -> Self {
        Self {
            topology,
            ledger,
            store,
            quarantine: None,
            now,
            cache: None,
        }
    }

    pub fn with_quarantine(mut self, registry: &'a QuarantineRegistry) -> Self {
        self.quarantine = Some(registry);
        self
    }

    /// Reuses a snapshot cache across evaluations. The cache must have been
    /// built over this context's ledger, evaluation time and window.
    pub fn with_cache(mut self, cache: &'a EvalCache<'a>) -> Self {
        self.cache = Some(cache);
        self
    }
}

/// The evaluation pipeline with a fixed configuration.
#[derive(Clone, Debug)]
pub struct TrustEngine {
    cfg: EngineConfig,
}

impl TrustEngine {
    pub fn new(cfg: EngineConfig) -> Result<Self, EngineError> {
        if !(0.0..=1.0).contains(&cfg.learning_rate) {
            return Err(EngineError::InvalidLearningRate(cfg.learning_rate));
        }
        if !cfg.activity_window_months.is_finite() || cfg.activity_window_months <= 0.0 {
            return Err(EngineError::InvalidWindow(cfg.activity_window_months));
        }
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// Full pipeline for one (evaluator, subject) pair: direct trust, the two
    /// recommendation channels with per-recommender credibility, decay of
    /// every stored value, quarantine filtering and final aggregation.
    ///
    /// Never fails on empty pools; channels without usable reports fall back
    /// to the midpoint default.
    pub fn evaluate(
        &self,
        ctx: &EvalContext<'_>,
        evaluator: &EntityId,
        subject: &EntityId,
    ) -> Result<TrustScore, EngineError> {
        if evaluator == subject {
            return Err(EngineError::SelfEvaluation(evaluator.clone()));
        }
        let cfg = &self.cfg;
        let default = initial_direct_trust(&cfg.scale);

        let dt = match ctx.store.get(evaluator, subject) {
            Some(rec) => decay(rec, ctx.now, default, cfg.decay_mode, &cfg.scale)?,
            None => default,
        };

        let mut pools = ctx.topology.recommender_pools(evaluator, subject)?;
        if let Some(registry) = ctx.quarantine {
            pools
                .same_domain
                .retain(|e| !registry.is_quarantined(e, ctx.now));
            pools
                .other_domain
                .retain(|(e, _)| !registry.is_quarantined(e, ctx.now));
        }
        let pool_union = pools.union();

        let local_cache;
        let cache = match ctx.cache {
            Some(cache) => cache,
            None => {
                local_cache = EvalCache::new(
                    ctx.ledger,
                    ctx.topology.entity_set(),
                    ctx.now,
                    cfg.activity_window_months,
                );
                &local_cache
            }
        };

        let weights_other = cfg
            .credibility_weights_other
            .unwrap_or(cfg.credibility_weights);

        let mut contributing = Vec::new();
        let mut same_domain_reports = Vec::new();
        let mut other_domain_reports = Vec::new();

        let members = pools
            .same_domain
            .iter()
            .map(|e| (e, RelationKind::IntraDomainIntraGrid))
            .chain(pools.other_domain.iter().map(|(e, k)| (e, *k)));
        for (recommender, relation) in members {
            // A recommender without a stored view of the subject reports nothing.
            let Some(rec) = ctx.store.get(recommender, subject) else {
                continue;
            };
            let reported = decay(rec, ctx.now, default, cfg.decay_mode, &cfg.scale)?;
            let sim = cache.similarity(cfg.similarity, evaluator, recommender);
            let act = cache.activity(recommender, &pool_union);
            let pop = cache.popularity(recommender);
            let weights = if relation == RelationKind::IntraDomainIntraGrid {
                &cfg.credibility_weights
            } else {
                &weights_other
            };
            let cred = credibility(sim, act, pop, weights);
            if relation == RelationKind::IntraDomainIntraGrid {
                same_domain_reports.push((reported, cred.value));
            } else {
                other_domain_reports.push((reported, cred.value));
            }
            contributing.push(RecommenderReport {
                recommender: recommender.clone(),
                reported,
                credibility: cred.value,
                relation,
            });
        }

        let itsd = indirect_trust(&same_domain_reports, &cfg.scale);
        let itod = indirect_trust(&other_domain_reports, &cfg.scale);
        let mut score = total_reputation(dt, itsd, itod, &cfg.aggregation, &cfg.scale);
        score.contributing = contributing;
        Ok(score)
    }

    /// Trust decision for one pair, from [`TrustEngine::evaluate`] and the
    /// configured thresholds.
    pub fn evaluate_and_classify(
        &self,
        ctx: &EvalContext<'_>,
        evaluator: &EntityId,
        subject: &EntityId,
    ) -> Result<(TrustScore, TrustLabel), EngineError> {
        let score = self.evaluate(ctx, evaluator, subject)?;
        let label = classify(&score, &self.cfg.thresholds);
        Ok((score, label))
    }
}
