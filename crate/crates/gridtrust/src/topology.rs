//! Grid/domain/entity hierarchy and classification of the relationship
//! between two entities (same domain, same grid, or across grids).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::id::{DomainId, EntityId, GridId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(EntityId),
    #[error("domain `{0}` references undeclared grid `{1}`")]
    UndeclaredGrid(DomainId, GridId),
    #[error("entity `{0}` placed in undeclared domain `{1}`")]
    UndeclaredDomain(EntityId, DomainId),
    #[error("duplicate entity `{0}`")]
    DuplicateEntity(EntityId),
    #[error("evaluator and subject must differ (got `{0}` twice)")]
    SamePair(EntityId),
}

/// The three possible environments for an initiator/provider relationship.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    IntraDomainIntraGrid,
    InterDomainIntraGrid,
    InterGrid,
}

impl RelationKind {
    pub const ALL: [RelationKind; 3] = [
        RelationKind::IntraDomainIntraGrid,
        RelationKind::InterDomainIntraGrid,
        RelationKind::InterGrid,
    ];
}

/// Static placement of entities into domains and domains into grids.
///
/// Immutable once built; evaluation code only reads it.
#[derive(Clone, Debug, Default)]
pub struct Topology {
    grids: BTreeSet<GridId>,
    domains: BTreeMap<DomainId, GridId>,
    entities: BTreeMap<EntityId, DomainId>,
}

/// Recommender pools for one evaluation, split by relationship to the evaluator.
///
/// `same_domain` feeds the same-domain indirect channel; `other_domain` is
/// everything else, with the relationship kind retained for reporting.
#[derive(Clone, Debug, Default)]
pub struct RecommenderPools {
    pub same_domain: BTreeSet<EntityId>,
    pub other_domain: Vec<(EntityId, RelationKind)>,
}

impl RecommenderPools {
    /// Every pool member in one set, regardless of channel.
    pub fn union(&self) -> BTreeSet<EntityId> {
        let mut all = self.same_domain.clone();
        all.extend(self.other_domain.iter().map(|(e, _)| e.clone()));
        all
    }

    pub fn len(&self) -> usize {
        self.same_domain.len() + self.other_domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_grid(&mut self, grid: GridId) {
        self.grids.insert(grid);
    }

    pub fn add_domain(&mut self, domain: DomainId, grid: GridId) -> Result<(), TopologyError> {
        if !self.grids.contains(&grid) {
            return Err(TopologyError::UndeclaredGrid(domain, grid));
        }
        self.domains.insert(domain, grid);
        Ok(())
    }

    pub fn place_entity(
        &mut self,
        entity: EntityId,
        domain: DomainId,
    ) -> Result<(), TopologyError> {
        if !self.domains.contains_key(&domain) {
            return Err(TopologyError::UndeclaredDomain(entity, domain));
        }
        if self.entities.contains_key(&entity) {
            return Err(TopologyError::DuplicateEntity(entity));
        }
        self.entities.insert(entity, domain);
        Ok(())
    }

    pub fn contains_entity(&self, entity: &EntityId) -> bool {
        self.entities.contains_key(entity)
    }

    pub fn domain_of(&self, entity: &EntityId) -> Result<&DomainId, TopologyError> {
        self.entities
            .get(entity)
            .ok_or_else(|| TopologyError::UnknownEntity(entity.clone()))
    }

    pub fn grid_of(&self, entity: &EntityId) -> Result<&GridId, TopologyError> {
        let domain = self.domain_of(entity)?;
        self.domains
            .get(domain)
            .ok_or_else(|| TopologyError::UndeclaredDomain(entity.clone(), domain.clone()))
    }

    /// Entities in deterministic (sorted) order.
    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.entities.keys()
    }

    pub fn entity_set(&self) -> BTreeSet<EntityId> {
        self.entities.keys().cloned().collect()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn grid_count(&self) -> usize {
        self.grids.len()
    }

    /// Classifies the relationship between two entities.
    ///
    /// Same domain → `IntraDomainIntraGrid`; different domains of the same
    /// grid → `InterDomainIntraGrid`; different grids → `InterGrid`.
    pub fn classify_relationship(
        &self,
        a: &EntityId,
        b: &EntityId,
    ) -> Result<RelationKind, TopologyError> {
        let dom_a = self.domain_of(a)?;
        let dom_b = self.domain_of(b)?;
        if dom_a == dom_b {
            return Ok(RelationKind::IntraDomainIntraGrid);
        }
        if self.grid_of(a)? == self.grid_of(b)? {
            return Ok(RelationKind::InterDomainIntraGrid);
        }
        Ok(RelationKind::InterGrid)
    }

    /// Entities (excluding evaluator and subject) whose relationship to the
    /// evaluator matches `kind`.
    pub fn recommenders_of(
        &self,
        evaluator: &EntityId,
        subject: &EntityId,
        kind: RelationKind,
    ) -> Result<BTreeSet<EntityId>, TopologyError> {
        if evaluator == subject {
            return Err(TopologyError::SamePair(evaluator.clone()));
        }
        if !self.contains_entity(subject) {
            return Err(TopologyError::UnknownEntity(subject.clone()));
        }
        let mut pool = BTreeSet::new();
        for entity in self.entities.keys() {
            if entity == evaluator || entity == subject {
                continue;
            }
            if self.classify_relationship(evaluator, entity)? == kind {
                pool.insert(entity.clone());
            }
        }
        Ok(pool)
    }

    /// Splits all candidate recommenders into the same-domain pool and the
    /// other-domain pool (other domain of the same grid plus other grids).
    pub fn recommender_pools(
        &self,
        evaluator: &EntityId,
        subject: &EntityId,
    ) -> Result<RecommenderPools, TopologyError> {
        if evaluator == subject {
            return Err(TopologyError::SamePair(evaluator.clone()));
        }
        if !self.contains_entity(subject) {
            return Err(TopologyError::UnknownEntity(subject.clone()));
        }
        let mut pools = RecommenderPools::default();
        for entity in self.entities.keys() {
            if entity == evaluator || entity == subject {
                continue;
            }
            match self.classify_relationship(evaluator, entity)? {
                RelationKind::IntraDomainIntraGrid => {
                    pools.same_domain.insert(entity.clone());
                }
                kind => pools.other_domain.push((entity.clone(), kind)),
            }
        }
        Ok(pools)
    }
}
