//! Layered concept hierarchy, object instances, action and plan nodes, and the
//! typed procedural-relation graph joining them.
//!
//! A [`TaskModel`] keeps every collection in id order, so two models built from
//! the same content serialize identically regardless of construction order.

mod format;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{slugify, unique_slug, ConceptId, InstanceId, NodeId};

pub use format::{FormatError, KB_HEADER};
pub use validate::{Violation, ViolationCode};

/// Reserved actor token for the person following the instructions.
pub const READER: &str = "reader";
/// Upper-layer concept every process concept descends from.
pub const ACTION_CONCEPT: &str = "action";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Upper,
    Instruction,
    Interface,
    Application,
}

impl Layer {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Upper => "upper",
            Layer::Instruction => "instruction",
            Layer::Interface => "interface",
            Layer::Application => "application",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "upper" => Layer::Upper,
            "instruction" => Layer::Instruction,
            "interface" => Layer::Interface,
            "application" => Layer::Application,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub label: String,
    pub layer: Layer,
    pub parent: Option<ConceptId>,
    /// Whether the concept itself may fill a role ("the folder of the document").
    #[serde(default)]
    pub referable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Shipped with the base ontology.
    Base,
    /// Produced from a UI specification.
    Derived,
    /// Added by the author.
    Authored,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Base => "base",
            Origin::Derived => "derived",
            Origin::Authored => "authored",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "base" => Origin::Base,
            "derived" => Origin::Derived,
            "authored" => Origin::Authored,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: InstanceId,
    pub concept: ConceptId,
    pub label: Option<String>,
    pub origin: Origin,
    /// Label path of the widget this instance was derived from.
    pub widget: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Actor {
    Reader,
    Agent(InstanceId),
}

impl Actor {
    pub fn as_str(&self) -> &str {
        match self {
            Actor::Reader => READER,
            Actor::Agent(id) => id.as_str(),
        }
    }
}

/// What fills a participant role: an instance, or a referable concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filler {
    Instance(InstanceId),
    Concept(ConceptId),
}

impl Filler {
    pub fn as_str(&self) -> &str {
        match self {
            Filler::Instance(id) => id.as_str(),
            Filler::Concept(id) => id.as_str(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Actor,
    Actee,
    Location,
    Source,
    Means,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::Actor, Role::Actee, Role::Location, Role::Source, Role::Means];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Actor => "actor",
            Role::Actee => "actee",
            Role::Location => "location",
            Role::Source => "source",
            Role::Means => "means",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A role left open by derivation (e.g. the text typed into a field).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpenSlot {
    pub role: Role,
    pub concept: ConceptId,
}

/// A process plus its participant roles.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionComplex {
    pub process: ConceptId,
    pub actor: Actor,
    pub actee: Option<Filler>,
    pub location: Option<Filler>,
    pub source: Option<Filler>,
    pub means: Option<NodeId>,
    pub open_slot: Option<OpenSlot>,
}

impl ActionComplex {
    pub fn new(process: impl Into<ConceptId>, actor: Actor) -> Self {
        Self {
            process: process.into(),
            actor,
            actee: None,
            location: None,
            source: None,
            means: None,
            open_slot: None,
        }
    }

    pub fn with_actee(mut self, filler: Filler) -> Self {
        self.actee = Some(filler);
        self
    }

    pub fn with_location(mut self, filler: Filler) -> Self {
        self.location = Some(filler);
        self
    }

    pub fn with_source(mut self, filler: Filler) -> Self {
        self.source = Some(filler);
        self
    }

    /// Filled object roles in a fixed order.
    pub fn fillers(&self) -> impl Iterator<Item = (Role, &Filler)> {
        [
            (Role::Actee, self.actee.as_ref()),
            (Role::Location, self.location.as_ref()),
            (Role::Source, self.source.as_ref()),
        ]
        .into_iter()
        .filter_map(|(r, f)| f.map(|f| (r, f)))
    }

    pub fn filler(&self, role: Role) -> Option<&Filler> {
        match role {
            Role::Actee => self.actee.as_ref(),
            Role::Location => self.location.as_ref(),
            Role::Source => self.source.as_ref(),
            Role::Actor | Role::Means => None,
        }
    }

    pub fn set_filler(&mut self, role: Role, filler: Filler) {
        match role {
            Role::Actee => self.actee = Some(filler),
            Role::Location => self.location = Some(filler),
            Role::Source => self.source = Some(filler),
            Role::Actor | Role::Means => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionNode {
    pub id: NodeId,
    pub complex: ActionComplex,
    pub origin: Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decomposition {
    Sequence,
    Choice,
}

impl Decomposition {
    pub fn as_str(self) -> &'static str {
        match self {
            Decomposition::Sequence => "sequence",
            Decomposition::Choice => "choice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sequence" => Some(Decomposition::Sequence),
            "choice" => Some(Decomposition::Choice),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanNode {
    pub id: NodeId,
    pub decomposition: Decomposition,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    Goal,
    Precondition,
    SubAction,
    SideEffect,
    Warning,
    Cancellation,
}

impl RelationKind {
    pub const ALL: [RelationKind; 6] = [
        RelationKind::Goal,
        RelationKind::Precondition,
        RelationKind::SubAction,
        RelationKind::SideEffect,
        RelationKind::Warning,
        RelationKind::Cancellation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Goal => "goal",
            RelationKind::Precondition => "precondition",
            RelationKind::SubAction => "sub-action",
            RelationKind::SideEffect => "side-effect",
            RelationKind::Warning => "warning",
            RelationKind::Cancellation => "cancellation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        RelationKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Node types expected at (from, to).
    pub fn endpoints(self) -> (NodeType, NodeType) {
        match self {
            RelationKind::SideEffect => (NodeType::Action, NodeType::Action),
            _ => (NodeType::Plan, NodeType::Action),
        }
    }

    /// Whether the edge takes part in the goal/decomposition hierarchy.
    pub fn is_hierarchical(self) -> bool {
        matches!(
            self,
            RelationKind::Goal | RelationKind::Precondition | RelationKind::SubAction
        )
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeType {
    Action,
    Plan,
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeType::Action => "action",
            NodeType::Plan => "plan",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationEdge {
    pub kind: RelationKind,
    pub from: NodeId,
    pub to: NodeId,
    pub order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("unresolved-filler: role `{role}` refers to unknown `{id}`")]
    UnresolvedFiller { role: Role, id: String },
    #[error("unknown-concept: `{0}`")]
    UnknownConcept(ConceptId),
    #[error("not-an-action: `{0}` does not descend from `action`")]
    NotAnAction(ConceptId),
    #[error("unknown-node: `{0}`")]
    UnknownNode(NodeId),
    #[error("duplicate-id: `{0}`")]
    DuplicateId(String),
    #[error("type-mismatch: {kind} expects {expected} at `{endpoint}` ({detail})")]
    TypeMismatch {
        kind: RelationKind,
        endpoint: NodeId,
        expected: String,
        detail: String,
    },
    #[error("duplicate-goal: plan `{0}` already has a goal")]
    DuplicateGoal(NodeId),
    #[error("multiple-achievers: `{action}` is already the goal of `{plan}`")]
    AlreadyAchieved { action: NodeId, plan: NodeId },
    #[error("order-collision: plan `{plan}` already has {kind} order {order}")]
    OrderCollision {
        plan: NodeId,
        kind: RelationKind,
        order: u32,
    },
    #[error("invalid-order: {0}")]
    InvalidOrder(String),
    #[error("would-create-cycle: {}", .0.iter().map(NodeId::as_str).collect::<Vec<_>>().join(" -> "))]
    WouldCreateCycle(Vec<NodeId>),
    #[error("duplicate-edge: {kind} {from} -> {to}")]
    DuplicateEdge {
        kind: RelationKind,
        from: NodeId,
        to: NodeId,
    },
}

impl KbError {
    /// Machine-readable code, the text before the first `:`.
    pub fn code(&self) -> &'static str {
        match self {
            KbError::UnresolvedFiller { .. } => "unresolved-filler",
            KbError::UnknownConcept(_) => "unknown-concept",
            KbError::NotAnAction(_) => "not-an-action",
            KbError::UnknownNode(_) => "unknown-node",
            KbError::DuplicateId(_) => "duplicate-id",
            KbError::TypeMismatch { .. } => "type-mismatch",
            KbError::DuplicateGoal(_) => "duplicate-goal",
            KbError::AlreadyAchieved { .. } => "multiple-achievers",
            KbError::OrderCollision { .. } => "order-collision",
            KbError::InvalidOrder(_) => "invalid-order",
            KbError::WouldCreateCycle(_) => "would-create-cycle",
            KbError::DuplicateEdge { .. } => "duplicate-edge",
        }
    }
}

/// Result of [`TaskModel::add_action`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedAction {
    pub id: NodeId,
    /// Set when an identical complex already existed; `id` is the existing node.
    pub duplicate: bool,
}

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskModel {
    version: u32,
    concepts: BTreeMap<ConceptId, Concept>,
    instances: BTreeMap<InstanceId, Instance>,
    actions: BTreeMap<NodeId, ActionNode>,
    plans: BTreeMap<NodeId, PlanNode>,
    edges: BTreeSet<RelationEdge>,
}

impl Default for TaskModel {
    fn default() -> Self {
        Self::new()
    }
}

impl TaskModel {
    pub fn new() -> Self {
        Self {
            version: FORMAT_VERSION,
            concepts: BTreeMap::new(),
            instances: BTreeMap::new(),
            actions: BTreeMap::new(),
            plans: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActionNode> {
        self.actions.values()
    }

    pub fn plans(&self) -> impl Iterator<Item = &PlanNode> {
        self.plans.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &RelationEdge> {
        self.edges.iter()
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.get(id)
    }

    pub fn action(&self, id: &str) -> Option<&ActionNode> {
        self.actions.get(id)
    }

    pub fn plan(&self, id: &str) -> Option<&PlanNode> {
        self.plans.get(id)
    }

    pub fn node_type(&self, id: &str) -> Option<NodeType> {
        if self.actions.contains_key(id) {
            Some(NodeType::Action)
        } else if self.plans.contains_key(id) {
            Some(NodeType::Plan)
        } else {
            None
        }
    }

    pub fn id_taken(&self, id: &str) -> bool {
        id == READER
            || self.concepts.contains_key(id)
            || self.instances.contains_key(id)
            || self.actions.contains_key(id)
            || self.plans.contains_key(id)
    }

    pub fn add_concept(&mut self, concept: Concept) -> Result<(), KbError> {
        if self.id_taken(concept.id.as_str()) {
            return Err(KbError::DuplicateId(concept.id.to_string()));
        }
        self.concepts.insert(concept.id.clone(), concept);
        Ok(())
    }

    pub fn add_instance(&mut self, instance: Instance) -> Result<(), KbError> {
        if self.id_taken(instance.id.as_str()) {
            return Err(KbError::DuplicateId(instance.id.to_string()));
        }
        if !self.concepts.contains_key(&instance.concept) {
            return Err(KbError::UnknownConcept(instance.concept.clone()));
        }
        self.instances.insert(instance.id.clone(), instance);
        Ok(())
    }

    /// Ancestors of `id` starting with `id` itself. Stops on unknown parents
    /// and on cycles.
    pub fn ancestors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Concept> + 'a {
        let mut seen = BTreeSet::new();
        let mut next = self.concepts.get(id);
        std::iter::from_fn(move || {
            let current = next?;
            if !seen.insert(current.id.as_str()) {
                return None;
            }
            next = current.parent.as_ref().and_then(|p| self.concepts.get(p));
            Some(current)
        })
    }

    /// Subsumption by ancestry: `concept` equals or descends from `ancestor`.
    pub fn is_a(&self, concept: &str, ancestor: &str) -> bool {
        self.ancestors(concept).any(|c| c.id.as_str() == ancestor)
    }

    pub fn children<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Concept> + 'a {
        self.concepts
            .values()
            .filter(move |c| c.parent.as_ref().is_some_and(|p| p.as_str() == id))
    }

    /// The concept a filler belongs to, if it resolves.
    pub fn filler_concept<'a>(&'a self, filler: &'a Filler) -> Option<&'a ConceptId> {
        match filler {
            Filler::Instance(id) => self.instances.get(id).map(|i| &i.concept),
            Filler::Concept(id) => self.concepts.get(id).map(|c| &c.id),
        }
    }

    /// Resolves a bare id into a filler: instances win over concepts.
    pub fn resolve_filler(&self, id: &str) -> Option<Filler> {
        if self.instances.contains_key(id) {
            Some(Filler::Instance(id.into()))
        } else if self.concepts.contains_key(id) {
            Some(Filler::Concept(id.into()))
        } else {
            None
        }
    }

    pub fn is_system_agent(&self, actor: &Actor) -> bool {
        match actor {
            Actor::Reader => false,
            Actor::Agent(id) => self.instances.contains_key(id),
        }
    }

    fn check_complex(&self, complex: &ActionComplex) -> Result<(), KbError> {
        if !self.concepts.contains_key(&complex.process) {
            return Err(KbError::UnknownConcept(complex.process.clone()));
        }
        if !self.is_a(complex.process.as_str(), ACTION_CONCEPT) {
            return Err(KbError::NotAnAction(complex.process.clone()));
        }
        if let Actor::Agent(id) = &complex.actor {
            if !self.instances.contains_key(id) {
                return Err(KbError::UnresolvedFiller {
                    role: Role::Actor,
                    id: id.to_string(),
                });
            }
        }
        for (role, filler) in complex.fillers() {
            if self.filler_concept(filler).is_none() {
                return Err(KbError::UnresolvedFiller {
                    role,
                    id: filler.as_str().to_string(),
                });
            }
        }
        if let Some(means) = &complex.means {
            if self.node_type(means.as_str()).is_none() {
                return Err(KbError::UnresolvedFiller {
                    role: Role::Means,
                    id: means.to_string(),
                });
            }
        }
        if let Some(slot) = &complex.open_slot {
            if !self.concepts.contains_key(&slot.concept) {
                return Err(KbError::UnknownConcept(slot.concept.clone()));
            }
        }
        Ok(())
    }

    /// An authored or base instance of a task-level concept (e.g. the
    /// current document), as opposed to an interface object.
    pub fn is_domain_instance(&self, id: &str) -> bool {
        self.instances.get(id).is_some_and(|inst| {
            inst.origin != Origin::Derived
                && self
                    .concepts
                    .get(&inst.concept)
                    .is_some_and(|c| matches!(c.layer, Layer::Instruction | Layer::Application))
        })
    }

    fn filler_slug(&self, filler: &Filler) -> String {
        match filler {
            Filler::Concept(id) => id.to_string(),
            Filler::Instance(id) => match self.instances.get(id) {
                // Domain objects are named generically: "save-a-document".
                Some(inst) if self.is_domain_instance(id.as_str()) => {
                    let noun = inst.concept.as_str();
                    let article = if noun.starts_with(['a', 'e', 'i', 'o', 'u']) {
                        "an"
                    } else {
                        "a"
                    };
                    format!("{article}-{noun}")
                }
                _ => id.to_string(),
            },
        }
    }

    /// Content-derived slug for a complex, before collision suffixing.
    pub fn action_slug(&self, complex: &ActionComplex) -> String {
        let mut slug = slugify(complex.process.as_str());
        let named = complex.actee.as_ref().or(complex.location.as_ref());
        if let Some(filler) = named {
            slug.push('-');
            slug.push_str(&self.filler_slug(filler));
        }
        slug
    }

    /// Adds an action node. An identical complex returns the existing id with
    /// `duplicate` set instead of adding a second node.
    pub fn add_action(&mut self, complex: ActionComplex, origin: Origin) -> Result<AddedAction, KbError> {
        self.check_complex(&complex)?;
        if let Some(existing) = self.actions.values().find(|a| a.complex == complex) {
            return Ok(AddedAction {
                id: existing.id.clone(),
                duplicate: true,
            });
        }
        let base = self.action_slug(&complex);
        let id = NodeId::new(unique_slug(&base, |s| self.id_taken(s)));
        self.actions.insert(
            id.clone(),
            ActionNode {
                id: id.clone(),
                complex,
                origin,
            },
        );
        Ok(AddedAction { id, duplicate: false })
    }

    /// Inserts an action under a caller-chosen id (derivation, file loading).
    pub fn insert_action(&mut self, node: ActionNode) -> Result<(), KbError> {
        if self.id_taken(node.id.as_str()) {
            return Err(KbError::DuplicateId(node.id.to_string()));
        }
        self.check_complex(&node.complex)?;
        self.actions.insert(node.id.clone(), node);
        Ok(())
    }

    /// Creates an empty plan named after `name` (slugified, suffixed on collision).
    pub fn add_plan(&mut self, decomposition: Decomposition, name: Option<&str>) -> NodeId {
        let base = name
            .map(slugify)
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "plan".into());
        let id = NodeId::new(unique_slug(&base, |s| self.id_taken(s)));
        self.plans.insert(
            id.clone(),
            PlanNode {
                id: id.clone(),
                decomposition,
                label: name.map(str::to_string),
            },
        );
        id
    }

    pub fn set_plan_label(&mut self, id: &str, label: Option<String>) -> Result<(), KbError> {
        let plan = self.plans.get_mut(id).ok_or_else(|| KbError::UnknownNode(id.into()))?;
        plan.label = label;
        Ok(())
    }

    /// Links two existing nodes, enforcing endpoint types, single goal,
    /// single achiever, order uniqueness and acyclicity.
    pub fn link(
        &mut self,
        kind: RelationKind,
        from: &str,
        to: &str,
        order: Option<u32>,
    ) -> Result<RelationEdge, KbError> {
        let from_type = self.node_type(from).ok_or_else(|| KbError::UnknownNode(from.into()))?;
        let to_type = self.node_type(to).ok_or_else(|| KbError::UnknownNode(to.into()))?;
        let (want_from, want_to) = kind.endpoints();
        if from_type != want_from {
            return Err(KbError::TypeMismatch {
                kind,
                endpoint: from.into(),
                expected: want_from.to_string(),
                detail: format!("found {from_type}"),
            });
        }
        if to_type != want_to {
            return Err(KbError::TypeMismatch {
                kind,
                endpoint: to.into(),
                expected: want_to.to_string(),
                detail: format!("found {to_type}"),
            });
        }
        if kind == RelationKind::SideEffect && !self.is_system_agent(&self.actions[to].complex.actor) {
            return Err(KbError::TypeMismatch {
                kind,
                endpoint: to.into(),
                expected: "system-agent action".into(),
                detail: "effect is performed by the reader".into(),
            });
        }
        let order = match (kind, order) {
            (_, Some(0)) => return Err(KbError::InvalidOrder("orders start at 1".into())),
            (RelationKind::SubAction, None) => Some(
                self.edges_from(from, RelationKind::SubAction)
                    .filter_map(|e| e.order)
                    .max()
                    .unwrap_or(0)
                    + 1,
            ),
            (RelationKind::SubAction | RelationKind::Precondition, given) => given,
            (_, Some(_)) => {
                return Err(KbError::InvalidOrder(format!("{kind} edges carry no order")));
            }
            (_, None) => None,
        };
        if self
            .edges
            .iter()
            .any(|e| e.kind == kind && e.from.as_str() == from && e.to.as_str() == to)
        {
            return Err(KbError::DuplicateEdge {
                kind,
                from: from.into(),
                to: to.into(),
            });
        }
        match kind {
            RelationKind::Goal => {
                if self.goal_of(from).is_some() {
                    return Err(KbError::DuplicateGoal(from.into()));
                }
                if let Some(plan) = self.achiever(to) {
                    return Err(KbError::AlreadyAchieved {
                        action: to.into(),
                        plan: plan.id.clone(),
                    });
                }
            }
            RelationKind::SubAction | RelationKind::Precondition => {
                if let Some(order) = order {
                    if self.edges_from(from, kind).any(|e| e.order == Some(order)) {
                        return Err(KbError::OrderCollision {
                            plan: from.into(),
                            kind,
                            order,
                        });
                    }
                }
            }
            _ => {}
        }
        let edge = RelationEdge {
            kind,
            from: from.into(),
            to: to.into(),
            order,
        };
        if kind.is_hierarchical() {
            // goal adds action -> plan; decomposition adds plan -> action.
            let (src, dst) = match kind {
                RelationKind::Goal => (to, from),
                _ => (from, to),
            };
            if let Some(mut path) = self.hierarchy_path(dst, src) {
                path.push(NodeId::from(dst));
                return Err(KbError::WouldCreateCycle(path));
            }
        }
        self.edges.insert(edge.clone());
        Ok(edge)
    }

    /// Successors in the goal/decomposition hierarchy: plan -> its
    /// preconditions and sub-actions, action -> the plan achieving it.
    fn hierarchy_successors(&self, node: &str) -> Vec<&NodeId> {
        self.edges
            .iter()
            .filter_map(|e| match e.kind {
                RelationKind::Goal if e.to.as_str() == node => Some(&e.from),
                RelationKind::Precondition | RelationKind::SubAction if e.from.as_str() == node => Some(&e.to),
                _ => None,
            })
            .collect()
    }

    /// Path from `start` to `target` in the hierarchy graph, if any.
    fn hierarchy_path(&self, start: &str, target: &str) -> Option<Vec<NodeId>> {
        let mut prev: BTreeMap<&str, &str> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::from([start]);
        let mut seen = BTreeSet::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                let mut path = vec![NodeId::from(node)];
                let mut cur = node;
                while let Some(&p) = prev.get(cur) {
                    path.push(NodeId::from(p));
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for next in self.hierarchy_successors(node) {
                if seen.insert(next.as_str()) {
                    prev.insert(next.as_str(), node);
                    queue.push_back(next.as_str());
                }
            }
        }
        None
    }

    pub fn edges_from<'a: 'b, 'b>(
        &'a self,
        from: &'b str,
        kind: RelationKind,
    ) -> impl Iterator<Item = &'a RelationEdge> + 'b {
        self.edges
            .iter()
            .filter(move |e| e.kind == kind && e.from.as_str() == from)
    }

    pub fn edges_to<'a: 'b, 'b>(
        &'a self,
        to: &'b str,
        kind: RelationKind,
    ) -> impl Iterator<Item = &'a RelationEdge> + 'b {
        self.edges.iter().filter(move |e| e.kind == kind && e.to.as_str() == to)
    }

    /// Goal action of a plan (the first one when the model is invalid).
    pub fn goal_of(&self, plan: &str) -> Option<&NodeId> {
        self.edges_from(plan, RelationKind::Goal).map(|e| &e.to).next()
    }

    /// The plan achieving an action, if any.
    pub fn achiever(&self, action: &str) -> Option<&PlanNode> {
        self.edges_to(action, RelationKind::Goal)
            .next()
            .and_then(|e| self.plans.get(&e.from))
    }

    /// Targets of `kind` edges out of `from`, ordered by (order, id); edges
    /// without an order sort after ordered ones.
    pub fn ordered_targets(&self, from: &str, kind: RelationKind) -> Vec<&NodeId> {
        let mut edges: Vec<_> = self.edges_from(from, kind).collect();
        edges.sort_by(|a, b| (a.order.is_none(), a.order, &a.to).cmp(&(b.order.is_none(), b.order, &b.to)));
        edges.into_iter().map(|e| &e.to).collect()
    }

    pub fn remove_edge(&mut self, edge: &RelationEdge) -> bool {
        self.edges.remove(edge)
    }

    /// Inserts an edge without any checks; used when loading files so that
    /// invalid models can still be read and reported by `validate`.
    pub(crate) fn insert_edge_unchecked(&mut self, edge: RelationEdge) {
        self.edges.insert(edge);
    }

    pub(crate) fn insert_plan_unchecked(&mut self, plan: PlanNode) {
        self.plans.insert(plan.id.clone(), plan);
    }

    pub(crate) fn insert_action_unchecked(&mut self, node: ActionNode) {
        self.actions.insert(node.id.clone(), node);
    }

    pub(crate) fn insert_concept_unchecked(&mut self, concept: Concept) {
        self.concepts.insert(concept.id.clone(), concept);
    }

    pub(crate) fn insert_instance_unchecked(&mut self, instance: Instance) {
        self.instances.insert(instance.id.clone(), instance);
    }
}
