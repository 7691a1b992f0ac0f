//! Task models for software procedures, derived from UI specifications and
//! completed by an author through a controlled language, and the planner and
//! realizer that draft step-by-step instructions from them in English and
//! French.

pub mod bundled;
pub mod cnl;
pub mod generate;
pub mod graph;
pub mod ids;
pub mod kb;
pub mod pipeline;
pub mod planner;
pub mod realizer;
mod record;
pub mod script;
pub mod uispec;

pub use cnl::{Cnl, CnlError, Grammar, GroundSentence, Pattern};
pub use graph::Graph;
pub use ids::{ConceptId, InstanceId, NodeId};
pub use kb::{
    ActionComplex, ActionNode, Actor, Concept, Decomposition, Filler, Instance, KbError, Layer, Origin, PlanNode,
    RelationEdge, RelationKind, Role, TaskModel, Violation, ViolationCode,
};
pub use planner::{plan_document, plan_fragment, ActKind, DiscourseAct, DocPlan, PlanError};
pub use realizer::{realize_document, realize_sentence, Language, LanguageRules, Lexicon, RealizeError, RenderedDoc};
pub use script::{AuthorScript, Command, ScriptError};
pub use uispec::{derive_instances, parse_uispec, RuleTable, WidgetKind, WidgetSpec};
