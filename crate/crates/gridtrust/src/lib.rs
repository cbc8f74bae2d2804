//! Reputation-based trust engine and deterministic grid simulator.
//!
//! Entities live in domains, domains in grids. An evaluator's trust in a
//! provider combines its own direct experience with credibility-weighted
//! recommendations from the evaluator's domain and from other domains, where
//! credibility blends rank-correlation similarity with recent activity and
//! popularity. Stored reputations decay toward an unknown-state default as
//! they age. Recommenders whose rankings diverge from pool consensus are
//! quarantined so their reports stop influencing allocation decisions.
//!
//! The [`sim`] module generates seeded scenarios and runs the proposed
//! pipeline (Kendall similarity plus quarantine) side by side with a baseline
//! (Spearman similarity, no quarantine), producing comparison reports via
//! [`report`]. [`oracle`] holds an independent brute-force checker for the
//! similarity path.

pub mod config;
pub mod credibility;
pub mod engine;
pub mod id;
pub mod ledger;
pub mod oracle;
pub mod purge;
pub mod report;
pub mod rng;
pub mod sim;
pub mod topology;

pub use config::{BehaviorModel, ConfigError, ScenarioConfig};
pub use credibility::{
    kendall_similarity, spearman_similarity, CredibilityWeights, SimilarityMethod,
};
pub use engine::{
    classify, AggregationWeights, EngineConfig, RatingScale, ReputationStore, Thresholds,
    TrustEngine, TrustLabel, TrustScore,
};
pub use id::{DomainId, EntityId, GridId};
pub use ledger::{InteractionRecord, Ledger, RatingVector, Timestamp};
pub use purge::{PurgePolicy, QuarantineRegistry};
pub use sim::{run_all, ExperimentOutput};
pub use topology::{RelationKind, Topology};
