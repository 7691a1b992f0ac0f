//! Textual `.kb` serialization.
//!
//! ```text
//! taskdraft-kb 1
//! concept <id> layer=<layer> [parent=<id>] label="<text>" [referable=true]
//! instance <id> concept=<id> [label="<text>"] origin=<origin> [widget="<path>"]
//! action <id> origin=<origin> process=<id> actor=<reader|id> [actee=<id>] [location=<id>] [source=<id>] [means=<id>] [open=<role>:<concept>]
//! plan <id> mode=<sequence|choice> [label="<text>"]
//! edge <kind> <from> <to> [order=<n>]
//! ```
//!
//! Records are written grouped by type and sorted by id, so writing is
//! canonical and reading then writing a canonical file is byte-identical.
//! Role fillers name an instance or, failing that, a concept.

use std::fmt::Write as _;

use thiserror::Error;

use super::{
    ActionComplex, ActionNode, Actor, Concept, Decomposition, Filler, Instance, Layer, OpenSlot, Origin, PlanNode,
    RelationEdge, RelationKind, Role, TaskModel, FORMAT_VERSION, READER,
};
use crate::ids::{ConceptId, InstanceId, NodeId};
use crate::record::{push_pair, quote, tokenize, Pairs, Token};

pub const KB_HEADER: &str = "taskdraft-kb";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl TaskModel {
    pub fn to_text(&self) -> String {
        let mut out = format!("{KB_HEADER} {}\n", self.version);
        for c in self.concepts.values() {
            let _ = write!(out, "concept {} layer={}", c.id, c.layer.as_str());
            if let Some(p) = &c.parent {
                let _ = write!(out, " parent={p}");
            }
            let _ = write!(out, " label={}", quote(&c.label));
            if c.referable {
                out.push_str(" referable=true");
            }
            out.push('\n');
        }
        for i in self.instances.values() {
            let _ = write!(out, "instance {} concept={}", i.id, i.concept);
            if let Some(label) = &i.label {
                let _ = write!(out, " label={}", quote(label));
            }
            let _ = write!(out, " origin={}", i.origin.as_str());
            if let Some(w) = &i.widget {
                let _ = write!(out, " widget={}", quote(w));
            }
            out.push('\n');
        }
        for a in self.actions.values() {
            let c = &a.complex;
            let _ = write!(
                out,
                "action {} origin={} process={} actor={}",
                a.id,
                a.origin.as_str(),
                c.process,
                c.actor.as_str()
            );
            for (role, filler) in c.fillers() {
                push_pair(&mut out, role.as_str(), filler.as_str());
            }
            if let Some(m) = &c.means {
                push_pair(&mut out, "means", m.as_str());
            }
            if let Some(slot) = &c.open_slot {
                let _ = write!(out, " open={}:{}", slot.role, slot.concept);
            }
            out.push('\n');
        }
        for p in self.plans.values() {
            let _ = write!(out, "plan {} mode={}", p.id, p.decomposition.as_str());
            if let Some(label) = &p.label {
                let _ = write!(out, " label={}", quote(label));
            }
            out.push('\n');
        }
        for e in &self.edges {
            let _ = write!(out, "edge {} {} {}", e.kind, e.from, e.to);
            if let Some(o) = e.order {
                let _ = write!(out, " order={o}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses a `.kb` file. Structural invariants are not enforced here;
    /// call [`TaskModel::validate`] on the result.
    pub fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut model = TaskModel::new();
        let mut header_seen = false;
        // Fillers are resolved after all records are read.
        let mut pending: Vec<(NodeId, Role, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| FormatError { line, message };
            let tokens = tokenize(raw).map_err(err)?;
            if tokens.is_empty() {
                continue;
            }
            let (positional, mut pairs) = Pairs::from_tokens(tokens).map_err(err)?;
            let words: Vec<&str> = positional
                .iter()
                .map(|t| t.text().ok_or_else(|| err("expected a word".into())))
                .collect::<Result<_, _>>()?;
            if !header_seen {
                match words.as_slice() {
                    [KB_HEADER, v] => {
                        let version: u32 = v.parse().map_err(|_| err(format!("bad version `{v}`")))?;
                        if version != FORMAT_VERSION {
                            return Err(err(format!("unsupported version {version}")));
                        }
                        header_seen = true;
                        continue;
                    }
                    _ => return Err(err(format!("expected `{KB_HEADER} {FORMAT_VERSION}` header"))),
                }
            }
            if positional.iter().any(|t| matches!(t, Token::Quoted(_))) {
                return Err(err("quoted text is only allowed as a field value".into()));
            }
            let duplicate = |model: &TaskModel, id: &str| {
                if model.id_taken(id) {
                    Err(err(format!("duplicate id `{id}`")))
                } else {
                    Ok(())
                }
            };
            match words.as_slice() {
                ["concept", id] => {
                    duplicate(&model, id)?;
                    let layer = pairs.require("layer").map_err(err)?;
                    let layer = Layer::parse(&layer).ok_or_else(|| err(format!("bad layer `{layer}`")))?;
                    let parent = pairs.take("parent").map(ConceptId::from);
                    let label = pairs.require("label").map_err(err)?;
                    let referable = match pairs.take("referable").as_deref() {
                        None | Some("false") => false,
                        Some("true") => true,
                        Some(other) => return Err(err(format!("bad referable `{other}`"))),
                    };
                    pairs.finish().map_err(err)?;
                    model.insert_concept_unchecked(Concept {
                        id: (*id).into(),
                        label,
                        layer,
                        parent,
                        referable,
                    });
                }
                ["instance", id] => {
                    duplicate(&model, id)?;
                    let concept = pairs.require("concept").map_err(err)?;
                    let label = pairs.take("label");
                    let origin = parse_origin(&pairs.require("origin").map_err(err)?).map_err(err)?;
                    let widget = pairs.take("widget");
                    pairs.finish().map_err(err)?;
                    model.insert_instance_unchecked(Instance {
                        id: (*id).into(),
                        concept: concept.into(),
                        label,
                        origin,
                        widget,
                    });
                }
                ["action", id] => {
                    duplicate(&model, id)?;
                    let origin = parse_origin(&pairs.require("origin").map_err(err)?).map_err(err)?;
                    let process = pairs.require("process").map_err(err)?;
                    let actor = match pairs.require("actor").map_err(err)?.as_str() {
                        READER => Actor::Reader,
                        other => Actor::Agent(InstanceId::from(other)),
                    };
                    let mut complex = ActionComplex::new(process, actor);
                    for role in [Role::Actee, Role::Location, Role::Source] {
                        if let Some(v) = pairs.take(role.as_str()) {
                            pending.push(((*id).into(), role, v));
                        }
                    }
                    complex.means = pairs.take("means").map(NodeId::from);
                    if let Some(open) = pairs.take("open") {
                        let (role, concept) = open
                            .split_once(':')
                            .and_then(|(r, c)| Some((Role::parse(r)?, c)))
                            .ok_or_else(|| err(format!("bad open slot `{open}`")))?;
                        complex.open_slot = Some(OpenSlot {
                            role,
                            concept: concept.into(),
                        });
                    }
                    pairs.finish().map_err(err)?;
                    model.insert_action_unchecked(ActionNode {
                        id: (*id).into(),
                        complex,
                        origin,
                    });
                }
                ["plan", id] => {
                    duplicate(&model, id)?;
                    let mode = pairs.require("mode").map_err(err)?;
                    let decomposition = Decomposition::parse(&mode).ok_or_else(|| err(format!("bad mode `{mode}`")))?;
                    let label = pairs.take("label");
                    pairs.finish().map_err(err)?;
                    model.insert_plan_unchecked(PlanNode {
                        id: (*id).into(),
                        decomposition,
                        label,
                    });
                }
                ["edge", kind, from, to] => {
                    let kind = RelationKind::parse(kind).ok_or_else(|| err(format!("bad relation `{kind}`")))?;
                    let order = pairs
                        .take("order")
                        .map(|o| o.parse::<u32>().map_err(|_| err(format!("bad order `{o}`"))))
                        .transpose()?;
                    pairs.finish().map_err(err)?;
                    model.insert_edge_unchecked(RelationEdge {
                        kind,
                        from: (*from).into(),
                        to: (*to).into(),
                        order,
                    });
                }
                [other, ..] => return Err(err(format!("unknown record `{other}`"))),
                [] => return Err(err("empty record".into())),
            }
        }
        if !header_seen {
            return Err(FormatError {
                line: 1,
                message: format!("missing `{KB_HEADER} {FORMAT_VERSION}` header"),
            });
        }
        for (action, role, id) in pending {
            let filler = model.resolve_filler(&id).unwrap_or_else(|| Filler::Instance(id.into()));
            if let Some(node) = model.actions.get_mut(&action) {
                node.complex.set_filler(role, filler);
            }
        }
        Ok(model)
    }
}

fn parse_origin(s: &str) -> Result<Origin, String> {
    Origin::parse(s).ok_or_else(|| format!("bad origin `{s}`"))
}
