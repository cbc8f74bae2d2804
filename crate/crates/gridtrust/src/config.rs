//! Scenario configuration: file schema, validation and CLI overrides.
//!
//! A scenario file is TOML with four blocks:
//!
//! ```toml
//! [topology]
//! grids = ["G1", "G2"]
//!
//! [topology.domains]
//! D1 = "G1"
//! D2 = "G2"
//!
//! [entities.A]
//! domain = "D1"
//! quality = 2.4          # ground-truth service quality in [0, mu]
//! behavior = "honest"    # honest | inverter | random
//! noise_sigma = 0.15     # honest rating noise, optional
//! # seed = 11            # optional per-entity stream override
//!
//! [params]               # every key optional, defaults shown in Raw form
//! mu = 3.0
//! aggregation_weights = [0.5, 0.3, 0.2]
//! credibility_weights = [0.5, 0.3, 0.2]
//! eta = 2.2
//! xi = 1.8
//! stance = "paranoid"    # paranoid | trusting
//! alpha = 0.5
//! activity_window_months = 1.0
//! decay_mode = "revert"  # revert | extrapolate
//! theta = 0.0
//! min_overlap = 3
//! quarantine_months = 3.0
//!
//! [schedule]
//! warmup_rounds = 6
//! sampling = "sweep"     # sweep | uniform
//! tick_months = 0.25
//! evaluations = [["B", "I"], ["C", "E"]]
//! runs = 10
//! master_seed = 7
//! ```
//!
//! Validation collects every violation instead of stopping at the first.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::credibility::CredibilityWeights;
use crate::credibility::SimilarityMethod;
use crate::engine::{AggregationWeights, DecayMode, EngineConfig, RatingScale, Stance, Thresholds};
use crate::id::EntityId;
use crate::purge::PurgePolicy;
use crate::topology::Topology;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {}", Violations(.0))]
    Invalid(Vec<String>),
    #[error("unknown override key `{0}`")]
    UnknownOverrideKey(String),
    #[error("override `{key}` expects {expected} (got `{value}`)")]
    BadOverrideValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("override must look like key=value (got `{0}`)")]
    MalformedOverride(String),
}

struct Violations<'a>(&'a Vec<String>);

impl fmt::Display for Violations<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(v)?;
        }
        Ok(())
    }
}

/// How an entity rates the providers it interacts with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BehaviorModel {
    /// Reports ground truth plus Gaussian noise, clamped to the scale.
    Honest { noise_sigma: f64 },
    /// Reports `mu - ground_truth`.
    Inverter,
    /// Reports a uniform draw over the scale.
    RandomLiar,
}

impl BehaviorModel {
    pub fn is_malicious(&self) -> bool {
        !matches!(self, BehaviorModel::Honest { .. })
    }
}

/// One entity's configured behavior and ground-truth service quality.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityProfile {
    pub behavior: BehaviorModel,
    pub quality: f64,
    /// Optional override of the entity's derived noise-stream seed.
    pub seed: Option<u64>,
}

/// Pair sampling rule for warm-up rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Every ordered pair once per round, in sorted order.
    Sweep,
    /// `interactions_per_round` uniform draws over ordered pairs.
    Uniform,
}

/// Which (initiator, provider) evaluations a run performs.
#[derive(Clone, Debug, PartialEq)]
pub enum EvaluationPlan {
    Explicit(Vec<(EntityId, EntityId)>),
    Sampled(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub warmup_rounds: u32,
    pub sampling: Sampling,
    pub interactions_per_round: Option<u32>,
    pub tick_months: f64,
    pub evaluations: EvaluationPlan,
    pub runs: u32,
    pub master_seed: u64,
}

/// Engine, credibility and purge parameters shared by both models of a run.
#[derive(Clone, Debug)]
pub struct Params {
    pub scale: RatingScale,
    pub aggregation: AggregationWeights,
    pub credibility: CredibilityWeights,
    pub credibility_other: Option<CredibilityWeights>,
    pub thresholds: Thresholds,
    pub learning_rate: f64,
    pub activity_window_months: f64,
    pub decay_mode: DecayMode,
    pub purge: PurgePolicy,
}

impl Params {
    /// Engine configuration for one model, differing only in the similarity
    /// statistic.
    pub fn engine_config(&self, similarity: SimilarityMethod) -> EngineConfig {
        EngineConfig {
            scale: self.scale,
            aggregation: self.aggregation,
            credibility_weights: self.credibility,
            credibility_weights_other: self.credibility_other,
            thresholds: self.thresholds,
            learning_rate: self.learning_rate,
            activity_window_months: self.activity_window_months,
            decay_mode: self.decay_mode,
            similarity,
        }
    }
}

/// A validated scenario: topology, per-entity profiles, parameters, schedule.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub topology: Topology,
    pub profiles: BTreeMap<EntityId, EntityProfile>,
    pub params: Params,
    pub schedule: Schedule,
}

impl ScenarioConfig {
    /// Entities configured with a non-honest behavior.
    pub fn malicious_entities(&self) -> Vec<EntityId> {
        self.profiles
            .iter()
            .filter(|(_, p)| p.behavior.is_malicious())
            .map(|(e, _)| e.clone())
            .collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    topology: RawTopology,
    entities: BTreeMap<String, RawEntity>,
    #[serde(default)]
    params: RawParams,
    schedule: RawSchedule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    grids: Vec<String>,
    domains: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntity {
    domain: String,
    quality: f64,
    #[serde(default = "default_behavior")]
    behavior: String,
    #[serde(default)]
    noise_sigma: f64,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_behavior() -> String {
    "honest".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawParams {
    mu: f64,
    aggregation_weights: [f64; 3],
    credibility_weights: [f64; 3],
    credibility_weights_other: Option<[f64; 3]>,
    eta: f64,
    xi: f64,
    stance: String,
    alpha: f64,
    activity_window_months: f64,
    decay_mode: String,
    theta: f64,
    min_overlap: usize,
    quarantine_months: f64,
    /// When set, non-honest entities have their quality forced to this value
    /// (liars as bad providers, not only bad recommenders).
    malicious_low_quality: Option<f64>,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            mu: 3.0,
            aggregation_weights: [0.5, 0.3, 0.2],
            credibility_weights: [0.5, 0.3, 0.2],
            credibility_weights_other: None,
            eta: 2.2,
            xi: 1.8,
            stance: "paranoid".to_string(),
            alpha: 0.5,
            activity_window_months: 1.0,
            decay_mode: "revert".to_string(),
            theta: 0.0,
            min_overlap: 3,
            quarantine_months: 3.0,
            malicious_low_quality: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSchedule {
    warmup_rounds: u32,
    sampling: String,
    interactions_per_round: Option<u32>,
    tick_months: f64,
    evaluations: Option<Vec<(String, String)>>,
    evaluation_count: Option<u32>,
    runs: u32,
    master_seed: u64,
}

impl Default for RawSchedule {
    fn default() -> Self {
        Self {
            warmup_rounds: 6,
            sampling: "uniform".to_string(),
            interactions_per_round: None,
            tick_months: 0.25,
            evaluations: None,
            evaluation_count: None,
            runs: 1,
            master_seed: 0,
        }
    }
}

pub fn load(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    load_with_overrides(path, &[])
}

pub fn load_with_overrides(
    path: &Path,
    overrides: &[(String, String)],
) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_toml_str_with_overrides(&text, overrides)
}

pub fn from_toml_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    from_toml_str_with_overrides(text, &[])
}

pub fn from_toml_str_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ScenarioConfig, ConfigError> {
    let mut raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    for (key, value) in overrides {
        apply_override(&mut raw, key, value)?;
    }
    validate(raw)
}

/// Splits `key=value` strings as passed on the command line.
pub fn parse_override_arg(arg: &str) -> Result<(String, String), ConfigError> {
    match arg.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::MalformedOverride(arg.to_string())),
    }
}

fn apply_override(raw: &mut RawConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    fn parse<T: std::str::FromStr>(
        key: &str,
        value: &str,
        expected: &'static str,
    ) -> Result<T, ConfigError> {
        value.parse().map_err(|_| ConfigError::BadOverrideValue {
            key: key.to_string(),
            value: value.to_string(),
            expected,
        })
    }
    fn parse_triple(key: &str, value: &str) -> Result<[f64; 3], ConfigError> {
        let parts: Vec<&str> = value.split(',').collect();
        if parts.len() == 3 {
            let mut out = [0.0; 3];
            for (slot, part) in out.iter_mut().zip(&parts) {
                match part.trim().parse() {
                    Ok(v) => *slot = v,
                    Err(_) => {
                        return Err(ConfigError::BadOverrideValue {
                            key: key.to_string(),
                            value: value.to_string(),
                            expected: "three comma-separated numbers",
                        })
                    }
                }
            }
            return Ok(out);
        }
        Err(ConfigError::BadOverrideValue {
            key: key.to_string(),
            value: value.to_string(),
            expected: "three comma-separated numbers",
        })
    }

    match key {
        "mu" => raw.params.mu = parse(key, value, "a number")?,
        "eta" => raw.params.eta = parse(key, value, "a number")?,
        "xi" => raw.params.xi = parse(key, value, "a number")?,
        "alpha" => raw.params.alpha = parse(key, value, "a number")?,
        "theta" => raw.params.theta = parse(key, value, "a number")?,
        "stance" => raw.params.stance = value.to_string(),
        "decay_mode" => raw.params.decay_mode = value.to_string(),
        "activity_window_months" => {
            raw.params.activity_window_months = parse(key, value, "a number")?
        }
        "min_overlap" => raw.params.min_overlap = parse(key, value, "an integer")?,
        "quarantine_months" => raw.params.quarantine_months = parse(key, value, "a number")?,
        "malicious_low_quality" => {
            raw.params.malicious_low_quality = Some(parse(key, value, "a number")?)
        }
        "aggregation_weights" => raw.params.aggregation_weights = parse_triple(key, value)?,
        "credibility_weights" => raw.params.credibility_weights = parse_triple(key, value)?,
        "credibility_weights_other" => {
            raw.params.credibility_weights_other = Some(parse_triple(key, value)?)
        }
        "warmup_rounds" => raw.schedule.warmup_rounds = parse(key, value, "an integer")?,
        "interactions_per_round" => {
            raw.schedule.interactions_per_round = Some(parse(key, value, "an integer")?)
        }
        "tick_months" => raw.schedule.tick_months = parse(key, value, "a number")?,
        "sampling" => raw.schedule.sampling = value.to_string(),
        "evaluation_count" => {
            raw.schedule.evaluation_count = Some(parse(key, value, "an integer")?)
        }
        "runs" => raw.schedule.runs = parse(key, value, "an integer")?,
        "master_seed" => raw.schedule.master_seed = parse(key, value, "an integer")?,
        _ => return Err(ConfigError::UnknownOverrideKey(key.to_string())),
    }
    Ok(())
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn validate(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let mut violations = Vec::new();

    // Scale first: several later checks reference mu.
    let scale = match RatingScale::new(raw.params.mu) {
        Ok(s) => s,
        Err(e) => {
            violations.push(format!("params.mu: {e}"));
            RatingScale::new(1.0).unwrap()
        }
    };
    let mu = raw.params.mu;

    let mut topology = Topology::new();
    for grid in &raw.topology.grids {
        if !valid_label(grid) {
            violations.push(format!(
                "topology: grid label `{grid}` is not a plain label"
            ));
            continue;
        }
        topology.add_grid(grid.as_str().into());
    }
    for (domain, grid) in &raw.topology.domains {
        if !valid_label(domain) {
            violations.push(format!(
                "topology: domain label `{domain}` is not a plain label"
            ));
            continue;
        }
        if let Err(e) = topology.add_domain(domain.as_str().into(), grid.as_str().into()) {
            violations.push(format!("topology: {e}"));
        }
    }

    let mut profiles = BTreeMap::new();
    if raw.entities.is_empty() {
        violations.push("entities: at least one entity is required".to_string());
    }
    for (name, entity) in &raw.entities {
        if !valid_label(name) {
            violations.push(format!("entities: label `{name}` is not a plain label"));
            continue;
        }
        let id = EntityId::from(name.as_str());
        if let Err(e) = topology.place_entity(id.clone(), entity.domain.as_str().into()) {
            violations.push(format!("entities.{name}: {e}"));
        }
        let behavior = match entity.behavior.as_str() {
            "honest" => {
                if entity.noise_sigma < 0.0 || !entity.noise_sigma.is_finite() {
                    violations.push(format!(
                        "entities.{name}: noise_sigma must be a non-negative number (got {})",
                        entity.noise_sigma
                    ));
                }
                BehaviorModel::Honest {
                    noise_sigma: entity.noise_sigma,
                }
            }
            "inverter" => BehaviorModel::Inverter,
            "random" => BehaviorModel::RandomLiar,
            other => {
                violations.push(format!(
                    "entities.{name}: behavior must be one of honest, inverter, random (got `{other}`)"
                ));
                BehaviorModel::Honest { noise_sigma: 0.0 }
            }
        };
        let mut quality = entity.quality;
        if behavior.is_malicious() {
            if let Some(q) = raw.params.malicious_low_quality {
                quality = q;
            }
        }
        if !quality.is_finite() || quality < 0.0 || quality > mu {
            violations.push(format!(
                "entities.{name}: quality must lie in [0, {mu}] (got {quality})"
            ));
        }
        profiles.insert(
            id,
            EntityProfile {
                behavior,
                quality,
                seed: entity.seed,
            },
        );
    }

    let aggregation = match AggregationWeights::new(
        raw.params.aggregation_weights[0],
        raw.params.aggregation_weights[1],
        raw.params.aggregation_weights[2],
    ) {
        Ok(w) => w,
        Err(e) => {
            violations.push(format!("params.aggregation_weights: {e}"));
            AggregationWeights::default()
        }
    };
    let credibility = match CredibilityWeights::new(
        raw.params.credibility_weights[0],
        raw.params.credibility_weights[1],
        raw.params.credibility_weights[2],
    ) {
        Ok(w) => w,
        Err(e) => {
            violations.push(format!("params.credibility_weights: {e}"));
            CredibilityWeights::default()
        }
    };
    let credibility_other = match raw.params.credibility_weights_other {
        Some([v1, v2, v3]) => match CredibilityWeights::new(v1, v2, v3) {
            Ok(w) => Some(w),
            Err(e) => {
                violations.push(format!("params.credibility_weights_other: {e}"));
                None
            }
        },
        None => None,
    };

    let stance = match raw.params.stance.as_str() {
        "paranoid" => Stance::Paranoid,
        "trusting" => Stance::Trusting,
        other => {
            violations.push(format!(
                "params.stance: must be paranoid or trusting (got `{other}`)"
            ));
            Stance::Paranoid
        }
    };
    let thresholds = match Thresholds::new(raw.params.eta, raw.params.xi, stance, &scale) {
        Ok(t) => t,
        Err(e) => {
            violations.push(format!("params: {e}"));
            Thresholds::new(scale.max() * 0.7, scale.max() * 0.3, stance, &scale)
                .expect("fallback thresholds")
        }
    };

    if !(0.0..=1.0).contains(&raw.params.alpha) {
        violations.push(format!(
            "params.alpha: learning rate must lie in [0, 1] (got {})",
            raw.params.alpha
        ));
    }
    if !raw.params.activity_window_months.is_finite() || raw.params.activity_window_months <= 0.0 {
        violations.push(format!(
            "params.activity_window_months: must be positive (got {})",
            raw.params.activity_window_months
        ));
    }
    let decay_mode = match raw.params.decay_mode.as_str() {
        "revert" => DecayMode::RevertToDefault,
        "extrapolate" => DecayMode::Extrapolate,
        other => {
            violations.push(format!(
                "params.decay_mode: must be revert or extrapolate (got `{other}`)"
            ));
            DecayMode::RevertToDefault
        }
    };

    let purge = match PurgePolicy::new(
        raw.params.theta,
        raw.params.min_overlap,
        raw.params.quarantine_months,
    ) {
        Ok(p) => p,
        Err(e) => {
            violations.push(format!("params: {e}"));
            PurgePolicy::default()
        }
    };

    let sampling = match raw.schedule.sampling.as_str() {
        "sweep" => Sampling::Sweep,
        "uniform" => Sampling::Uniform,
        other => {
            violations.push(format!(
                "schedule.sampling: must be sweep or uniform (got `{other}`)"
            ));
            Sampling::Uniform
        }
    };
    if sampling == Sampling::Uniform {
        match raw.schedule.interactions_per_round {
            Some(n) if n >= 1 => {}
            Some(n) => violations.push(format!(
                "schedule.interactions_per_round: must be at least 1 (got {n})"
            )),
            None => violations.push(
                "schedule.interactions_per_round: required when sampling is uniform".to_string(),
            ),
        }
    }
    if !raw.schedule.tick_months.is_finite() || raw.schedule.tick_months <= 0.0 {
        violations.push(format!(
            "schedule.tick_months: must be positive (got {})",
            raw.schedule.tick_months
        ));
    }
    if raw.schedule.runs < 1 {
        violations.push("schedule.runs: must be at least 1".to_string());
    }

    let evaluations = match (&raw.schedule.evaluations, raw.schedule.evaluation_count) {
        (Some(_), Some(_)) => {
            violations.push(
                "schedule: provide either evaluations or evaluation_count, not both".to_string(),
            );
            EvaluationPlan::Sampled(1)
        }
        (None, None) => {
            violations.push("schedule: provide either evaluations or evaluation_count".to_string());
            EvaluationPlan::Sampled(1)
        }
        (Some(pairs), None) => {
            let mut typed = Vec::new();
            for (initiator, provider) in pairs {
                let a = EntityId::from(initiator.as_str());
                let b = EntityId::from(provider.as_str());
                for e in [&a, &b] {
                    if !topology.contains_entity(e) {
                        violations.push(format!(
                            "schedule.evaluations: references unplaced entity `{e}`"
                        ));
                    }
                }
                if a == b {
                    violations.push(format!(
                        "schedule.evaluations: initiator and provider must differ (got `{a}`)"
                    ));
                }
                typed.push((a, b));
            }
            if typed.is_empty() {
                violations.push("schedule.evaluations: must not be empty".to_string());
            }
            EvaluationPlan::Explicit(typed)
        }
        (None, Some(count)) => {
            if count < 1 {
                violations.push("schedule.evaluation_count: must be at least 1".to_string());
            }
            EvaluationPlan::Sampled(count)
        }
    };

    if raw.entities.len() == 1 {
        violations.push("entities: at least two entities are required".to_string());
    }

    if !violations.is_empty() {
        return Err(ConfigError::Invalid(violations));
    }

    Ok(ScenarioConfig {
        topology,
        profiles,
        params: Params {
            scale,
            aggregation,
            credibility,
            credibility_other,
            thresholds,
            learning_rate: raw.params.alpha,
            activity_window_months: raw.params.activity_window_months,
            decay_mode,
            purge,
        },
        schedule: Schedule {
            warmup_rounds: raw.schedule.warmup_rounds,
            sampling,
            interactions_per_round: raw.schedule.interactions_per_round,
            tick_months: raw.schedule.tick_months,
            evaluations,
            runs: raw.schedule.runs,
            master_seed: raw.schedule.master_seed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = r#"
        [topology]
        grids = ["G1", "G2"]

        [topology.domains]
        D1 = "G1"
        D2 = "G2"

        [entities.A]
        domain = "D1"
        quality = 2.0

        [entities.B]
        domain = "D1"
        quality = 1.0
        behavior = "inverter"

        [entities.C]
        domain = "D2"
        quality = 2.5
        noise_sigma = 0.1

        [schedule]
        warmup_rounds = 2
        sampling = "sweep"
        tick_months = 0.25
        evaluations = [["A", "C"]]
        runs = 2
        master_seed = 7
    "#;

    #[test]
    fn valid_config_parses() {
        let cfg = from_toml_str(VALID).unwrap();
        assert_eq!(cfg.topology.entity_count(), 3);
        assert_eq!(cfg.malicious_entities(), vec![EntityId::from("B")]);
        assert_eq!(cfg.schedule.runs, 2);
        assert_eq!(
            cfg.schedule.evaluations,
            EvaluationPlan::Explicit(vec![("A".into(), "C".into())])
        );
        let (w1, w2, w3) = cfg.params.aggregation.values();
        assert_eq!((w1, w2, w3), (0.5, 0.3, 0.2));
    }

    fn violations_of(text: &str) -> Vec<String> {
        match from_toml_str(text) {
            Err(ConfigError::Invalid(v)) => v,
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn weight_sum_violation_is_named() {
        let text = VALID.replace(
            "[schedule]",
            "[params]\naggregation_weights = [0.6, 0.3, 0.2]\n\n[schedule]",
        );
        let v = violations_of(&text);
        assert!(v.iter().any(|m| m.contains("sum to 1")), "{v:?}");
    }

    #[test]
    fn weight_ordering_violation_is_named() {
        let text = VALID.replace(
            "[schedule]",
            "[params]\naggregation_weights = [0.2, 0.3, 0.5]\n\n[schedule]",
        );
        let v = violations_of(&text);
        assert!(v.iter().any(|m| m.contains("w1 > w2 > w3")), "{v:?}");
    }

    #[test]
    fn threshold_inversion_is_named() {
        let text = VALID.replace("[schedule]", "[params]\neta = 1.0\nxi = 2.0\n\n[schedule]");
        let v = violations_of(&text);
        assert!(v.iter().any(|m| m.contains("eta must exceed xi")), "{v:?}");
    }

    #[test]
    fn unplaced_entity_is_named() {
        let text = VALID.replace("domain = \"D2\"", "domain = \"D9\"");
        let v = violations_of(&text);
        assert!(
            v.iter()
                .any(|m| m.contains("`C`") && m.contains("undeclared domain")),
            "{v:?}"
        );
    }

    #[test]
    fn negative_quarantine_is_named() {
        let text = VALID.replace(
            "[schedule]",
            "[params]\nquarantine_months = -1.0\n\n[schedule]",
        );
        let v = violations_of(&text);
        assert!(
            v.iter()
                .any(|m| m.contains("quarantine duration must be positive")),
            "{v:?}"
        );
    }

    #[test]
    fn multiple_violations_are_collected() {
        let text = VALID.replace("domain = \"D2\"", "domain = \"D9\"").replace(
            "[schedule]",
            "[params]\nquarantine_months = -1.0\neta = 1.0\nxi = 2.0\n\n[schedule]",
        );
        let v = violations_of(&text);
        assert!(v.len() >= 3, "{v:?}");
    }

    #[test]
    fn uniform_sampling_requires_interaction_count() {
        let text = VALID.replace("sampling = \"sweep\"", "sampling = \"uniform\"");
        let v = violations_of(&text);
        assert!(
            v.iter().any(|m| m.contains("interactions_per_round")),
            "{v:?}"
        );
    }

    #[test]
    fn unknown_toml_key_is_a_parse_error() {
        let text = VALID.replace("master_seed = 7", "master_seed = 7\nbogus_key = 1");
        assert!(matches!(from_toml_str(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn overrides_apply_before_validation() {
        let cfg = from_toml_str_with_overrides(
            VALID,
            &[
                ("eta".to_string(), "2.5".to_string()),
                ("runs".to_string(), "5".to_string()),
                ("master_seed".to_string(), "99".to_string()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.params.thresholds.eta, 2.5);
        assert_eq!(cfg.schedule.runs, 5);
        assert_eq!(cfg.schedule.master_seed, 99);
    }

    #[test]
    fn unknown_override_key_is_rejected() {
        let err = from_toml_str_with_overrides(VALID, &[("bogus".to_string(), "1".to_string())])
            .unwrap_err();
        assert!(matches!(err, ConfigError::UnknownOverrideKey(_)));
    }

    #[test]
    fn bad_override_value_is_rejected() {
        let err = from_toml_str_with_overrides(VALID, &[("eta".to_string(), "high".to_string())])
            .unwrap_err();
        assert!(matches!(err, ConfigError::BadOverrideValue { .. }));
    }

    #[test]
    fn weight_triple_override() {
        let cfg = from_toml_str_with_overrides(
            VALID,
            &[(
                "aggregation_weights".to_string(),
                "0.6,0.25,0.15".to_string(),
            )],
        )
        .unwrap();
        assert_eq!(cfg.params.aggregation.values(), (0.6, 0.25, 0.15));
    }

    #[test]
    fn override_arg_parsing() {
        assert_eq!(
            parse_override_arg("eta=2.5").unwrap(),
            ("eta".to_string(), "2.5".to_string())
        );
        assert!(parse_override_arg("eta").is_err());
    }

    #[test]
    fn malicious_low_quality_overrides_liar_quality() {
        let text = VALID.replace(
            "[schedule]",
            "[params]\nmalicious_low_quality = 0.4\n\n[schedule]",
        );
        let cfg = from_toml_str(&text).unwrap();
        assert_eq!(cfg.profiles[&EntityId::from("B")].quality, 0.4);
        assert_eq!(cfg.profiles[&EntityId::from("A")].quality, 2.0);
    }
}
