//! Recommendation credibility: rank-correlation similarity between rating
//! vectors, recent activity, popularity, and their weighted combination.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use thiserror::Error;

use crate::id::EntityId;
use crate::ledger::{Ledger, LedgerError, RatingVector, Timestamp};

/// Similarity substituted when two vectors share fewer than two subjects.
pub const NEUTRAL_SIMILARITY: f64 = 0.0;

/// Weight-sum slack for credibility and aggregation weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CredibilityError {
    #[error("subject `{0}` missing from rating vector")]
    SubjectMissing(EntityId),
    #[error("ordered pair sets span different subject universes")]
    UniverseMismatch,
    #[error("insufficient rating overlap: {common} common subject(s), need at least 2")]
    InsufficientOverlap { common: usize },
    #[error("invalid credibility weights: {0}")]
    InvalidWeights(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Strict-preference pairs derived from one rating vector.
///
/// `(a, b)` is present iff the vector scores `a` strictly above `b`; ties
/// contribute no pair. The universe records which subjects were compared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPairSet {
    pairs: BTreeSet<(EntityId, EntityId)>,
    universe: BTreeSet<EntityId>,
}

impl OrderedPairSet {
    pub fn pairs(&self) -> &BTreeSet<(EntityId, EntityId)> {
        &self.pairs
    }

    pub fn universe_size(&self) -> usize {
        self.universe.len()
    }

    pub fn universe(&self) -> &BTreeSet<EntityId> {
        &self.universe
    }
}

/// Builds the ordered-pair set of `v` restricted to `subjects`.
pub fn to_ordered_pairs(
    v: &RatingVector,
    subjects: &BTreeSet<EntityId>,
) -> Result<OrderedPairSet, CredibilityError> {
    for s in subjects {
        if v.score_of(s).is_none() {
            return Err(CredibilityError::SubjectMissing(s.clone()));
        }
    }
    let mut pairs = BTreeSet::new();
    for a in subjects {
        for b in subjects {
            if a == b {
                continue;
            }
            if v.score_of(a).unwrap() > v.score_of(b).unwrap() {
                pairs.insert((a.clone(), b.clone()));
            }
        }
    }
    Ok(OrderedPairSet {
        pairs,
        universe: subjects.clone(),
    })
}

/// Count of ordered pairs present in exactly one of the two sets.
pub fn symmetric_difference_distance(
    s1: &OrderedPairSet,
    s2: &OrderedPairSet,
) -> Result<usize, CredibilityError> {
    if s1.universe != s2.universe {
        return Err(CredibilityError::UniverseMismatch);
    }
    let only_in_s1 = s1.pairs.difference(&s2.pairs).count();
    let only_in_s2 = s2.pairs.difference(&s1.pairs).count();
    Ok(only_in_s1 + only_in_s2)
}

/// Rank-agreement similarity `1 - 2*d_delta / (n*(n-1))` over the subjects both
/// vectors scored. Equals the classic concordant/discordant tau for strict
/// orders. Errors with `InsufficientOverlap` when fewer than two common
/// subjects exist; callers substitute [`NEUTRAL_SIMILARITY`].
pub fn kendall_similarity(a: &RatingVector, b: &RatingVector) -> Result<f64, CredibilityError> {
    let common = a.common_subjects(b);
    let n = common.len();
    if n < 2 {
        return Err(CredibilityError::InsufficientOverlap { common: n });
    }
    let s1 = to_ordered_pairs(a, &common)?;
    let s2 = to_ordered_pairs(b, &common)?;
    let d = symmetric_difference_distance(&s1, &s2)?;
    Ok(1.0 - (2.0 * d as f64) / ((n * (n - 1)) as f64))
}

/// Average 1-based ranks, ties sharing the mean rank of their run.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1..=j).sum::<usize>() as f64 / (j - i) as f64;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

/// Spearman rank correlation `1 - 6*sum(d_i^2) / (n*(n^2-1))` over the common
/// subjects, with average ranks for ties. Used by the baseline model.
pub fn spearman_similarity(a: &RatingVector, b: &RatingVector) -> Result<f64, CredibilityError> {
    let common = a.common_subjects(b);
    let n = common.len();
    if n < 2 {
        return Err(CredibilityError::InsufficientOverlap { common: n });
    }
    let xs: Vec<f64> = common.iter().map(|s| a.score_of(s).unwrap()).collect();
    let ys: Vec<f64> = common.iter().map(|s| b.score_of(s).unwrap()).collect();
    let rx = average_ranks(&xs);
    let ry = average_ranks(&ys);
    let sum_d2: f64 = rx.iter().zip(&ry).map(|(x, y)| (x - y) * (x - y)).sum();
    let n = n as f64;
    Ok(1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0)))
}

/// Which rank-correlation statistic feeds the credibility factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityMethod {
    Kendall,
    Spearman,
}

impl SimilarityMethod {
    pub fn similarity(self, a: &RatingVector, b: &RatingVector) -> Result<f64, CredibilityError> {
        match self {
            SimilarityMethod::Kendall => kendall_similarity(a, b),
            SimilarityMethod::Spearman => spearman_similarity(a, b),
        }
    }

    /// Similarity with the neutral fallback applied on insufficient overlap.
    pub fn similarity_or_neutral(self, a: &RatingVector, b: &RatingVector) -> f64 {
        match self.similarity(a, b) {
            Ok(s) => s,
            Err(CredibilityError::InsufficientOverlap { .. }) => NEUTRAL_SIMILARITY,
            Err(_) => NEUTRAL_SIMILARITY,
        }
    }
}

/// Fraction of recent accepted interactions the recommender took part in,
/// normalized over the participations of every pool member. Zero when the
/// pool was entirely idle.
pub fn activity(
    ledger: &Ledger,
    recommender: &EntityId,
    from: Timestamp,
    to: Timestamp,
    pool: &BTreeSet<EntityId>,
) -> Result<f64, CredibilityError> {
    let window = ledger.interactions_in_window(from, to)?;
    let mut own = 0usize;
    let mut total = 0usize;
    for rec in window.iter().filter(|r| r.accepted) {
        for party in [&rec.initiator, &rec.provider] {
            if pool.contains(party) {
                total += 1;
            }
            if party == recommender {
                own += 1;
            }
        }
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(own as f64 / total as f64)
}

/// Fraction of recent accepted interactions in which the recommender was the
/// chosen provider. Zero for an empty window.
pub fn popularity(
    ledger: &Ledger,
    recommender: &EntityId,
    from: Timestamp,
    to: Timestamp,
) -> Result<f64, CredibilityError> {
    let window = ledger.interactions_in_window(from, to)?;
    let mut chosen = 0usize;
    let mut total = 0usize;
    for rec in window.iter().filter(|r| r.accepted) {
        total += 1;
        if &rec.provider == recommender {
            chosen += 1;
        }
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(chosen as f64 / total as f64)
}

/// Relative importance of similarity, activity and popularity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CredibilityWeights {
    v1: f64,
    v2: f64,
    v3: f64,
}

impl CredibilityWeights {
    pub fn new(v1: f64, v2: f64, v3: f64) -> Result<Self, CredibilityError> {
        for v in [v1, v2, v3] {
            if !v.is_finite() || v < 0.0 {
                return Err(CredibilityError::InvalidWeights(format!(
                    "weights must be non-negative (got {v1}, {v2}, {v3})"
                )));
            }
        }
        let sum = v1 + v2 + v3;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(CredibilityError::InvalidWeights(format!(
                "weights must sum to 1 (got {sum})"
            )));
        }
        Ok(Self { v1, v2, v3 })
    }

    pub fn values(&self) -> (f64, f64, f64) {
        (self.v1, self.v2, self.v3)
    }
}

impl Default for CredibilityWeights {
    fn default() -> Self {
        Self {
            v1: 0.5,
            v2: 0.3,
            v3: 0.2,
        }
    }
}

/// A recommender's credibility factor with its raw components kept for audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Credibility {
    /// Combined factor, clamped into `[0, 1]`.
    pub value: f64,
    pub similarity: f64,
    pub activity: f64,
    pub popularity: f64,
}

/// Combines the three components: `clamp(v1*sim + v2*act + v3*pop, 0, 1)`.
///
/// A negative raw combination is clamped to zero rather than allowed to
/// subtract reputation mass; hostile recommenders are handled by quarantine.
pub fn credibility(sim: f64, act: f64, pop: f64, weights: &CredibilityWeights) -> Credibility {
    let raw = weights.v1 * sim + weights.v2 * act + weights.v3 * pop;
    Credibility {
        value: raw.clamp(0.0, 1.0),
        similarity: sim,
        activity: act,
        popularity: pop,
    }
}

/// Memoized view of one ledger snapshot at a fixed evaluation time.
///
/// Rating vectors, pairwise similarities and window tallies are shared by
/// every evaluation of a run, so the simulator builds one cache per run
/// instead of rescanning the ledger per recommender.
pub struct EvalCache<'a> {
    ledger: &'a Ledger,
    universe: BTreeSet<EntityId>,
    as_of: Timestamp,
    window_from: Timestamp,
    window_to: Timestamp,
    vectors: RefCell<BTreeMap<EntityId, Rc<RatingVector>>>,
    similarities: RefCell<BTreeMap<(u8, EntityId, EntityId), f64>>,
    window_tallies: RefCell<Option<WindowTallies>>,
}

#[derive(Clone, Debug, Default)]
struct WindowTallies {
    participations: BTreeMap<EntityId, usize>,
    provider_counts: BTreeMap<EntityId, usize>,
    total_accepted: usize,
}

impl<'a> EvalCache<'a> {
    pub fn new(
        ledger: &'a Ledger,
        universe: BTreeSet<EntityId>,
        as_of: Timestamp,
        window_months: f64,
    ) -> Self {
        let from = Timestamp::months((as_of.value() - window_months).max(0.0))
            .expect("window start is finite and non-negative");
        Self {
            ledger,
            universe,
            as_of,
            window_from: from,
            window_to: as_of,
            vectors: RefCell::new(BTreeMap::new()),
            similarities: RefCell::new(BTreeMap::new()),
            window_tallies: RefCell::new(None),
        }
    }

    pub fn as_of(&self) -> Timestamp {
        self.as_of
    }

    pub fn window(&self) -> (Timestamp, Timestamp) {
        (self.window_from, self.window_to)
    }

    /// The rater's vector over every other entity in the universe.
    pub fn vector(&self, rater: &EntityId) -> Rc<RatingVector> {
        if let Some(v) = self.vectors.borrow().get(rater) {
            return Rc::clone(v);
        }
        let mut subjects = self.universe.clone();
        subjects.remove(rater);
        let vector = Rc::new(self.ledger.rating_vector_of(rater, &subjects, self.as_of));
        self.vectors
            .borrow_mut()
            .insert(rater.clone(), Rc::clone(&vector));
        vector
    }

    /// Count of subjects rated by both `a` and `b`.
    pub fn overlap(&self, a: &EntityId, b: &EntityId) -> usize {
        self.vector(a).common_subjects(&self.vector(b)).len()
    }

    /// Pairwise similarity with the neutral fallback on thin overlap.
    pub fn similarity(&self, method: SimilarityMethod, a: &EntityId, b: &EntityId) -> f64 {
        let key = if a <= b {
            (method as u8, a.clone(), b.clone())
        } else {
            (method as u8, b.clone(), a.clone())
        };
        if let Some(&sim) = self.similarities.borrow().get(&key) {
            return sim;
        }
        let sim = method.similarity_or_neutral(&self.vector(a), &self.vector(b));
        self.similarities.borrow_mut().insert(key, sim);
        sim
    }

    fn with_tallies<T>(&self, f: impl FnOnce(&WindowTallies) -> T) -> T {
        if self.window_tallies.borrow().is_none() {
            let mut tallies = WindowTallies::default();
            let window = self
                .ledger
                .interactions_in_window(self.window_from, self.window_to)
                .expect("window bounds are ordered by construction");
            for rec in window.iter().filter(|r| r.accepted) {
                tallies.total_accepted += 1;
                *tallies
                    .provider_counts
                    .entry(rec.provider.clone())
                    .or_default() += 1;
                for party in [&rec.initiator, &rec.provider] {
                    *tallies.participations.entry(party.clone()).or_default() += 1;
                }
            }
            *self.window_tallies.borrow_mut() = Some(tallies);
        }
        f(self.window_tallies.borrow().as_ref().unwrap())
    }

    /// Same value as [`activity`] over the cached window.
    pub fn activity(&self, recommender: &EntityId, pool: &BTreeSet<EntityId>) -> f64 {
        self.with_tallies(|t| {
            let own = t.participations.get(recommender).copied().unwrap_or(0);
            let total: usize = pool
                .iter()
                .map(|p| t.participations.get(p).copied().unwrap_or(0))
                .sum();
            if total == 0 {
                0.0
            } else {
                own as f64 / total as f64
            }
        })
    }

    /// Same value as [`popularity`] over the cached window.
    pub fn popularity(&self, recommender: &EntityId) -> f64 {
        self.with_tallies(|t| {
            if t.total_accepted == 0 {
                return 0.0;
            }
            let chosen = t.provider_counts.get(recommender).copied().unwrap_or(0);
            chosen as f64 / t.total_accepted as f64
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::InteractionRecord;
    use proptest::prelude::*;

    fn vector(rater: &str, scores: &[(&str, f64)]) -> RatingVector {
        let mut v = RatingVector::new(rater.into(), Timestamp::ZERO);
        for (subject, score) in scores {
            v.set_score((*subject).into(), *score);
        }
        v
    }

    fn subjects(names: &[&str]) -> BTreeSet<EntityId> {
        names.iter().map(|n| EntityId::from(*n)).collect()
    }

    #[test]
    fn ordered_pairs_strict_order() {
        let v = vector("X", &[("P", 0.9), ("Q", 0.5), ("R", 0.1)]);
        let set = to_ordered_pairs(&v, &subjects(&["P", "Q", "R"])).unwrap();
        let expected: BTreeSet<(EntityId, EntityId)> = [
            ("P".into(), "Q".into()),
            ("P".into(), "R".into()),
            ("Q".into(), "R".into()),
        ]
        .into_iter()
        .collect();
        assert_eq!(set.pairs(), &expected);
        assert_eq!(set.universe_size(), 3);
    }

    #[test]
    fn ordered_pairs_all_ties_empty() {
        let v = vector("X", &[("P", 1.0), ("Q", 1.0), ("R", 1.0)]);
        let set = to_ordered_pairs(&v, &subjects(&["P", "Q", "R"])).unwrap();
        assert!(set.pairs().is_empty());
    }

    #[test]
    fn ordered_pairs_single_subject() {
        let v = vector("X", &[("P", 1.0)]);
        let set = to_ordered_pairs(&v, &subjects(&["P"])).unwrap();
        assert!(set.pairs().is_empty());
        assert_eq!(set.universe_size(), 1);
    }

    #[test]
    fn ordered_pairs_missing_subject_errors() {
        let v = vector("X", &[("P", 1.0)]);
        let err = to_ordered_pairs(&v, &subjects(&["P", "Z"])).unwrap_err();
        assert_eq!(err, CredibilityError::SubjectMissing("Z".into()));
    }

    #[test]
    fn symmetric_difference_identical_is_zero() {
        let v = vector("X", &[("P", 0.9), ("Q", 0.5), ("R", 0.1)]);
        let s = to_ordered_pairs(&v, &subjects(&["P", "Q", "R"])).unwrap();
        assert_eq!(symmetric_difference_distance(&s, &s).unwrap(), 0);
    }

    #[test]
    fn symmetric_difference_full_reversal_n3_is_6() {
        let a = vector("X", &[("P", 0.9), ("Q", 0.5), ("R", 0.1)]);
        let b = vector("Y", &[("P", 0.1), ("Q", 0.5), ("R", 0.9)]);
        let names = subjects(&["P", "Q", "R"]);
        let s1 = to_ordered_pairs(&a, &names).unwrap();
        let s2 = to_ordered_pairs(&b, &names).unwrap();
        assert_eq!(symmetric_difference_distance(&s1, &s2).unwrap(), 6);
    }

    #[test]
    fn symmetric_difference_adjacent_swap_is_2() {
        // Orders PQR vs PRQ: only the Q/R pair flips.
        let a = vector("X", &[("P", 3.0), ("Q", 2.0), ("R", 1.0)]);
        let b = vector("Y", &[("P", 3.0), ("Q", 1.0), ("R", 2.0)]);
        let names = subjects(&["P", "Q", "R"]);
        let s1 = to_ordered_pairs(&a, &names).unwrap();
        let s2 = to_ordered_pairs(&b, &names).unwrap();
        assert_eq!(symmetric_difference_distance(&s1, &s2).unwrap(), 2);
    }

    #[test]
    fn symmetric_difference_universe_mismatch_errors() {
        let a = vector("X", &[("P", 3.0), ("Q", 2.0)]);
        let b = vector("Y", &[("P", 3.0), ("R", 2.0)]);
        let s1 = to_ordered_pairs(&a, &subjects(&["P", "Q"])).unwrap();
        let s2 = to_ordered_pairs(&b, &subjects(&["P", "R"])).unwrap();
        assert_eq!(
            symmetric_difference_distance(&s1, &s2).unwrap_err(),
            CredibilityError::UniverseMismatch
        );
    }

    #[test]
    fn kendall_identical_orderings() {
        let a = vector("X", &[("P", 2.9), ("Q", 1.5), ("R", 0.4), ("S", 0.1)]);
        let b = vector("Y", &[("P", 2.0), ("Q", 1.9), ("R", 1.2), ("S", 0.2)]);
        assert_eq!(kendall_similarity(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn kendall_full_reversal_n3() {
        let a = vector("X", &[("P", 3.0), ("Q", 2.0), ("R", 1.0)]);
        let b = vector("Y", &[("P", 1.0), ("Q", 2.0), ("R", 3.0)]);
        assert_eq!(kendall_similarity(&a, &b).unwrap(), -1.0);
    }

    #[test]
    fn kendall_adjacent_swap_is_one_third() {
        let a = vector("X", &[("P", 3.0), ("Q", 2.0), ("R", 1.0)]);
        let b = vector("Y", &[("P", 3.0), ("Q", 1.0), ("R", 2.0)]);
        let sim = kendall_similarity(&a, &b).unwrap();
        assert_eq!(sim, 1.0 - 2.0 * 2.0 / 6.0);
        assert!((sim - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kendall_insufficient_overlap() {
        let a = vector("X", &[("P", 3.0), ("Q", 2.0)]);
        let b = vector("Y", &[("Q", 1.0), ("R", 2.0)]);
        assert_eq!(
            kendall_similarity(&a, &b).unwrap_err(),
            CredibilityError::InsufficientOverlap { common: 1 }
        );
        assert_eq!(SimilarityMethod::Kendall.similarity_or_neutral(&a, &b), 0.0);
    }

    #[test]
    fn kendall_restricts_to_common_subjects() {
        let a = vector("X", &[("P", 3.0), ("Q", 2.0), ("Z", 0.5)]);
        let b = vector("Y", &[("P", 2.0), ("Q", 1.0), ("W", 2.9)]);
        assert_eq!(kendall_similarity(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn spearman_identical_orderings() {
        let a = vector("X", &[("P", 3.0), ("Q", 2.0), ("R", 1.0)]);
        let b = vector("Y", &[("P", 2.5), ("Q", 2.0), ("R", 0.5)]);
        assert_eq!(spearman_similarity(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn spearman_full_reversal_n3() {
        let a = vector("X", &[("P", 3.0), ("Q", 2.0), ("R", 1.0)]);
        let b = vector("Y", &[("P", 1.0), ("Q", 2.0), ("R", 3.0)]);
        assert_eq!(spearman_similarity(&a, &b).unwrap(), -1.0);
    }

    #[test]
    fn spearman_single_swap_is_half() {
        // Ranks (1,2,3) vs (1,3,2): 1 - 6*2/24 = 0.5.
        let a = vector("X", &[("P", 1.0), ("Q", 2.0), ("R", 3.0)]);
        let b = vector("Y", &[("P", 1.0), ("Q", 3.0), ("R", 2.0)]);
        assert_eq!(spearman_similarity(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn average_ranks_handle_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 30.0]),
            vec![1.0, 2.5, 2.5, 4.0]
        );
    }

    fn interaction(initiator: &str, provider: &str, t: f64) -> InteractionRecord {
        InteractionRecord {
            initiator: initiator.into(),
            provider: provider.into(),
            time: Timestamp::months(t).unwrap(),
            outcome_rating: 1.0,
            accepted: true,
        }
    }

    #[test]
    fn activity_counts_participations() {
        let mut ledger = Ledger::new(3.0);
        // Pool {A, B}: A takes part in 5 participations out of 20.
        for i in 0..5 {
            ledger
                .record_interaction(interaction(
                    if i % 2 == 0 { "A" } else { "X" },
                    if i % 2 == 0 { "Y" } else { "A" },
                    0.1,
                ))
                .unwrap();
        }
        for _ in 0..15 {
            ledger
                .record_interaction(interaction("B", "Z", 0.2))
                .unwrap();
        }
        let pool = subjects(&["A", "B"]);
        let act = activity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
            &pool,
        )
        .unwrap();
        assert!((act - 0.25).abs() < 1e-12);
    }

    #[test]
    fn activity_idle_recommender_is_zero() {
        let mut ledger = Ledger::new(3.0);
        ledger
            .record_interaction(interaction("B", "Z", 0.1))
            .unwrap();
        let pool = subjects(&["A", "B"]);
        let act = activity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
            &pool,
        )
        .unwrap();
        assert_eq!(act, 0.0);
    }

    #[test]
    fn activity_sole_active_recommender_is_one() {
        let mut ledger = Ledger::new(3.0);
        ledger
            .record_interaction(interaction("A", "Z", 0.1))
            .unwrap();
        ledger
            .record_interaction(interaction("Y", "A", 0.2))
            .unwrap();
        let pool = subjects(&["A", "B"]);
        let act = activity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
            &pool,
        )
        .unwrap();
        assert_eq!(act, 1.0);
    }

    #[test]
    fn activity_empty_pool_window_is_zero() {
        let ledger = Ledger::new(3.0);
        let pool = subjects(&["A"]);
        let act = activity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
            &pool,
        )
        .unwrap();
        assert_eq!(act, 0.0);
    }

    #[test]
    fn popularity_counts_provider_selections() {
        let mut ledger = Ledger::new(3.0);
        for _ in 0..3 {
            ledger
                .record_interaction(interaction("X", "A", 0.1))
                .unwrap();
        }
        for _ in 0..9 {
            ledger
                .record_interaction(interaction("X", "B", 0.2))
                .unwrap();
        }
        let pop = popularity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
        )
        .unwrap();
        assert!((pop - 0.25).abs() < 1e-12);
    }

    #[test]
    fn popularity_never_chosen_is_zero() {
        let mut ledger = Ledger::new(3.0);
        ledger
            .record_interaction(interaction("A", "B", 0.1))
            .unwrap();
        let pop = popularity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(pop, 0.0);
    }

    #[test]
    fn popularity_empty_window_is_zero() {
        let ledger = Ledger::new(3.0);
        let pop = popularity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(pop, 0.0);
    }

    #[test]
    fn rejected_attempts_do_not_count() {
        let mut ledger = Ledger::new(3.0);
        let mut r = interaction("X", "A", 0.1);
        r.accepted = false;
        ledger.record_interaction(r).unwrap();
        ledger
            .record_interaction(interaction("X", "B", 0.2))
            .unwrap();
        let pop = popularity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(pop, 0.0);
        let pool = subjects(&["A", "B"]);
        let act = activity(
            &ledger,
            &"A".into(),
            Timestamp::ZERO,
            Timestamp::months(1.0).unwrap(),
            &pool,
        )
        .unwrap();
        assert_eq!(act, 0.0);
    }

    #[test]
    fn credibility_combines_components() {
        let w = CredibilityWeights::new(0.5, 0.3, 0.2).unwrap();
        let c = credibility(1.0, 0.25, 0.25, &w);
        assert!((c.value - 0.625).abs() < 1e-12);
        assert_eq!(c.similarity, 1.0);
    }

    #[test]
    fn credibility_clamps_negative_raw_to_zero() {
        let w = CredibilityWeights::new(0.5, 0.3, 0.2).unwrap();
        let c = credibility(-1.0, 0.0, 0.0, &w);
        assert_eq!(c.value, 0.0);
        assert_eq!(c.similarity, -1.0);
    }

    #[test]
    fn credibility_upper_bound() {
        let w = CredibilityWeights::new(0.5, 0.3, 0.2).unwrap();
        let c = credibility(1.0, 1.0, 1.0, &w);
        assert_eq!(c.value, 1.0);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(CredibilityWeights::new(0.5, 0.3, 0.3).is_err());
        assert!(CredibilityWeights::new(-0.1, 0.6, 0.5).is_err());
        assert!(CredibilityWeights::new(0.5, 0.3, 0.2).is_ok());
    }

    #[test]
    fn cache_agrees_with_direct_computation() {
        let mut ledger = Ledger::new(3.0);
        for (rater, subject, rating) in [
            ("A", "P", 2.0),
            ("A", "Q", 1.0),
            ("A", "B", 0.5),
            ("B", "P", 1.9),
            ("B", "Q", 1.1),
            ("B", "A", 2.2),
        ] {
            ledger
                .record_interaction(InteractionRecord {
                    initiator: rater.into(),
                    provider: subject.into(),
                    time: Timestamp::months(0.2).unwrap(),
                    outcome_rating: rating,
                    accepted: true,
                })
                .unwrap();
        }
        let universe = subjects(&["A", "B", "P", "Q"]);
        let now = Timestamp::months(0.5).unwrap();
        let cache = EvalCache::new(&ledger, universe.clone(), now, 1.0);
        let (from, to) = cache.window();

        let a_vec = ledger.rating_vector_of(&"A".into(), &subjects(&["B", "P", "Q"]), now);
        assert_eq!(*cache.vector(&"A".into()), a_vec);

        let b_vec = cache.vector(&"B".into());
        assert_eq!(
            cache.similarity(SimilarityMethod::Kendall, &"A".into(), &"B".into()),
            kendall_similarity(&a_vec, &b_vec).unwrap()
        );

        let pool = subjects(&["A", "B"]);
        for entity in ["A", "B", "P"] {
            let id: EntityId = entity.into();
            assert_eq!(
                cache.activity(&id, &pool),
                activity(&ledger, &id, from, to, &pool).unwrap()
            );
            assert_eq!(
                cache.popularity(&id),
                popularity(&ledger, &id, from, to).unwrap()
            );
        }
    }

    fn arb_scores(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..3.0, n)
    }

    proptest! {
        #[test]
        fn kendall_self_similarity_is_one(scores in arb_scores(5)) {
            // Perturb into a strict order by adding distinct offsets.
            let names = ["P", "Q", "R", "S", "T"];
            let mut v = RatingVector::new("X".into(), Timestamp::ZERO);
            for (i, (name, s)) in names.iter().zip(&scores).enumerate() {
                v.set_score((*name).into(), s + i as f64 * 7.0);
            }
            prop_assert_eq!(kendall_similarity(&v, &v).unwrap(), 1.0);
        }

        #[test]
        fn similarity_is_symmetric(xs in arb_scores(6), ys in arb_scores(6)) {
            let names = ["P", "Q", "R", "S", "T", "U"];
            let mut a = RatingVector::new("X".into(), Timestamp::ZERO);
            let mut b = RatingVector::new("Y".into(), Timestamp::ZERO);
            for ((name, x), y) in names.iter().zip(&xs).zip(&ys) {
                a.set_score((*name).into(), *x);
                b.set_score((*name).into(), *y);
            }
            prop_assert_eq!(kendall_similarity(&a, &b).unwrap(), kendall_similarity(&b, &a).unwrap());
            prop_assert_eq!(spearman_similarity(&a, &b).unwrap(), spearman_similarity(&b, &a).unwrap());
        }

        #[test]
        fn reversing_one_strict_order_negates_kendall(perm in proptest::sample::subsequence((0..8usize).collect::<Vec<_>>(), 3..8)) {
            let names = ["P", "Q", "R", "S", "T", "U", "V", "W"];
            let mut a = RatingVector::new("X".into(), Timestamp::ZERO);
            let mut b = RatingVector::new("Y".into(), Timestamp::ZERO);
            let mut flipped = RatingVector::new("Z".into(), Timestamp::ZERO);
            for (rank, &idx) in perm.iter().enumerate() {
                a.set_score(names[idx].into(), rank as f64);
                b.set_score(names[idx].into(), (idx * 2) as f64);
                flipped.set_score(names[idx].into(), -((idx * 2) as f64));
            }
            let direct = kendall_similarity(&a, &b).unwrap();
            let negated = kendall_similarity(&a, &flipped).unwrap();
            prop_assert!((direct + negated).abs() < 1e-12);
        }

        #[test]
        fn credibility_stays_bounded_and_monotone(
            sim in -1.0f64..=1.0,
            act in 0.0f64..=1.0,
            pop in 0.0f64..=1.0,
            bump in 0.0f64..=0.5,
        ) {
            let w = CredibilityWeights::default();
            let c = credibility(sim, act, pop, &w);
            prop_assert!((0.0..=1.0).contains(&c.value));
            let higher = credibility((sim + bump).min(1.0), act, pop, &w);
            prop_assert!(higher.value >= c.value);
        }
    }
}
