//! Rule-driven derivation of object instances and primitive actions.
//!
//! Rules file:
//!
//! ```text
//! taskdraft-rules 1
//! button -> choose actee=self
//! menu-item -> choose actee=self source=parent
//! text-field -> type actee=content:text location=self
//! ```
//!
//! `self` binds the widget's instance, `parent` its enclosing widget's, and
//! `content:<concept>` the widget's declared content, or leaves the role as
//! an open slot constrained to `<concept>` when none is declared.

use thiserror::Error;

use super::{WidgetKind, WidgetSpec};
use crate::ids::ConceptId;
use crate::kb::{
    ActionComplex, ActionNode, Actor, Instance, KbError, Layer, OpenSlot, Origin, Role, TaskModel, ACTION_CONCEPT,
};
use crate::record::{tokenize, Pairs};

pub const RULES_HEADER: &str = "taskdraft-rules";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    SelfWidget,
    Parent,
    Content { fallback: ConceptId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationRule {
    pub kind: WidgetKind,
    pub process: ConceptId,
    pub roles: Vec<(Role, Binding)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleTable {
    pub rules: Vec<DerivationRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct RuleError {
    pub line: usize,
    pub message: String,
}

impl RuleTable {
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut rules = Vec::new();
        let mut header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| RuleError { line, message };
            let tokens = tokenize(raw).map_err(err)?;
            if tokens.is_empty() {
                continue;
            }
            let (positional, pairs) = Pairs::from_tokens(tokens).map_err(err)?;
            let words: Vec<&str> = positional.iter().filter_map(|t| t.text()).collect();
            if !header {
                if words != [RULES_HEADER, "1"] {
                    return Err(err(format!("expected `{RULES_HEADER} 1` header")));
                }
                header = true;
                continue;
            }
            let [kind, "->", process] = words.as_slice() else {
                return Err(err("expected `<widget-kind> -> <process> role=binding ...`".into()));
            };
            let kind = WidgetKind::parse(kind).ok_or_else(|| err(format!("unknown widget kind `{kind}`")))?;
            let mut roles = Vec::new();
            for (role_name, value) in pairs.into_vec() {
                let role = Role::parse(&role_name)
                    .filter(|r| matches!(r, Role::Actee | Role::Location | Role::Source))
                    .ok_or_else(|| err(format!("unsupported role `{role_name}`")))?;
                let binding = match value.as_str() {
                    "self" => Binding::SelfWidget,
                    "parent" => Binding::Parent,
                    other => match other.strip_prefix("content:") {
                        Some(c) if !c.is_empty() => Binding::Content { fallback: c.into() },
                        _ => return Err(err(format!("unknown binding `{other}`"))),
                    },
                };
                roles.push((role, binding));
            }
            rules.push(DerivationRule {
                kind,
                process: (*process).into(),
                roles,
            });
        }
        if !header {
            return Err(RuleError {
                line: 1,
                message: format!("missing `{RULES_HEADER} 1` header"),
            });
        }
        Ok(RuleTable { rules })
    }

    pub fn for_kind(&self, kind: WidgetKind) -> impl Iterator<Item = &DerivationRule> {
        self.rules.iter().filter(move |r| r.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("unknown-rule-concept: `{0}` is not an interface-layer concept")]
    UnknownRuleConcept(ConceptId),
    #[error("unknown-content: widget `{widget}` declares unknown content `{content}`")]
    UnknownContent { widget: String, content: String },
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// Instances and actions derived from one widget tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    /// The application itself; it becomes the system agent.
    pub agent: Instance,
    /// Interface objects, pre-order.
    pub objects: Vec<Instance>,
    /// Primitive actions, pre-order, rules in table order per widget.
    pub actions: Vec<ActionNode>,
}

impl Derivation {
    /// Adds everything to `model`. Fails without partial changes being
    /// meaningful, so callers should apply to a scratch copy.
    pub fn apply(&self, model: &mut TaskModel) -> Result<(), KbError> {
        model.add_instance(self.agent.clone())?;
        for o in &self.objects {
            model.add_instance(o.clone())?;
        }
        for a in &self.actions {
            model.insert_action(a.clone())?;
        }
        Ok(())
    }
}

fn check_rule_concepts(rules: &RuleTable, model: &TaskModel) -> Result<(), DeriveError> {
    for rule in &rules.rules {
        let ok = model
            .concept(rule.process.as_str())
            .is_some_and(|c| c.layer == Layer::Interface)
            && model.is_a(rule.process.as_str(), ACTION_CONCEPT);
        if !ok {
            return Err(DeriveError::UnknownRuleConcept(rule.process.clone()));
        }
        for (_, binding) in &rule.roles {
            if let Binding::Content { fallback } = binding {
                if model.concept(fallback.as_str()).is_none() {
                    return Err(DeriveError::UnknownRuleConcept(fallback.clone()));
                }
            }
        }
    }
    for kind in WidgetKind::ALL {
        if model.concept(kind.concept()).is_none() {
            return Err(DeriveError::UnknownRuleConcept(kind.concept().into()));
        }
    }
    Ok(())
}

/// Derives object instances for every widget and primitive actions per the
/// rule table. `model` supplies the concept hierarchy and the id namespace;
/// it is not modified.
pub fn derive_instances(tree: &WidgetSpec, rules: &RuleTable, model: &TaskModel) -> Result<Derivation, DeriveError> {
    check_rule_concepts(rules, model)?;
    let mut scratch = model.clone();
    let mut agent = None;
    let mut objects = Vec::new();
    let mut actions = Vec::new();
    let mut paths: std::collections::BTreeMap<&str, String> = Default::default();

    for (parent, w) in tree.walk() {
        let path = match parent {
            Some(p) => format!("{}/{}", paths[p.id.as_str()], w.label),
            None => w.label.clone(),
        };
        paths.insert(w.id.as_str(), path.clone());
        let instance = Instance {
            id: w.id.as_str().into(),
            concept: w.kind.concept().into(),
            label: Some(w.label.clone()),
            origin: Origin::Derived,
            widget: Some(path),
        };
        scratch.add_instance(instance.clone())?;
        if parent.is_none() {
            agent = Some(instance);
        } else {
            objects.push(instance);
        }

        for rule in rules.for_kind(w.kind) {
            let mut complex = ActionComplex::new(rule.process.clone(), Actor::Reader);
            for (role, binding) in &rule.roles {
                match binding {
                    Binding::SelfWidget => complex.set_filler(*role, crate::kb::Filler::Instance(w.id.as_str().into())),
                    Binding::Parent => {
                        if let Some(p) = parent {
                            complex.set_filler(*role, crate::kb::Filler::Instance(p.id.as_str().into()));
                        }
                    }
                    Binding::Content { fallback } => match &w.content {
                        Some(content) => {
                            let filler =
                                scratch
                                    .resolve_filler(content)
                                    .ok_or_else(|| DeriveError::UnknownContent {
                                        widget: w.id.clone(),
                                        content: content.clone(),
                                    })?;
                            complex.set_filler(*role, filler);
                        }
                        None => {
                            complex.open_slot = Some(OpenSlot {
                                role: *role,
                                concept: fallback.clone(),
                            })
                        }
                    },
                }
            }
            let added = scratch.add_action(complex, Origin::Derived)?;
            if !added.duplicate {
                actions.push(scratch.action(added.id.as_str()).expect("just added").clone());
            }
        }
    }

    Ok(Derivation {
        agent: agent.expect("walk yields the root first"),
        objects,
        actions,
    })
}
