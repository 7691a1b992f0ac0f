//! Tactical generation: document plan -> text in one language, with a
//! character-span provenance map back to task-model nodes.
//!
//! Layout of a rendered document:
//!
//! ```text
//! <title>
//!
//! 1. <step or first alternative>
//!    <separator>
//!    <next alternative>
//!    <result>
//! 2. <step>
//!
//! • <note>
//! ```
//!
//! Continuation lines are indented by the width of their step's number
//! prefix. Warning notes carry a language-specific marker before the
//! sentence. The text ends with a newline.

mod lang;
mod lexicon;

pub use lang::{
    builtin_rules, capitalize, french_de, headline, Article, ClauseParts, English, French, LanguageRules, MissingForm,
    NounPhrase, VerbUse,
};
pub use lexicon::{ArticlePolicy, Gender, Language, Lexicon, LexiconError, NounEntry, VerbEntry, LEXICON_HEADER};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::NodeId;
use crate::kb::{ActionComplex, Actor, Filler, TaskModel};
use crate::planner::{ActKind, DiscourseAct, DocPlan};

pub const BULLET: &str = "• ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("missing-lexeme: no {form} for `{concept}` in the {language} lexicon")]
    MissingLexeme {
        concept: String,
        language: Language,
        form: String,
    },
    #[error("unknown-node: `{0}`")]
    UnknownNode(NodeId),
    #[error("unfilled-slot: `{0}` still has an open slot")]
    UnfilledSlot(NodeId),
    #[error("not-a-leaf: {0} acts are realized through their children")]
    NotALeaf(ActKind),
    #[error("language mismatch: lexicon is {lexicon}, rules are {rules}")]
    LanguageMismatch { lexicon: Language, rules: Language },
}

impl RealizeError {
    pub fn code(&self) -> &'static str {
        match self {
            RealizeError::MissingLexeme { .. } => "missing-lexeme",
            RealizeError::UnknownNode(_) => "unknown-node",
            RealizeError::UnfilledSlot(_) => "unfilled-slot",
            RealizeError::NotALeaf(_) => "not-a-leaf",
            RealizeError::LanguageMismatch { .. } => "language-mismatch",
        }
    }
}

/// A character range of the text (char offsets, end exclusive) and the node
/// the sentence there was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub node: NodeId,
    /// title, step, alternative, result, note or warning-note.
    pub act: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedDoc {
    pub language: Language,
    pub text: String,
    pub provenance: Vec<Span>,
}

impl RenderedDoc {
    /// Text covered by a span.
    pub fn span_text(&self, span: &Span) -> String {
        self.text.chars().skip(span.start).take(span.end - span.start).collect()
    }

    /// Node whose sentence covers the char offset, if any.
    pub fn node_at(&self, offset: usize) -> Option<&NodeId> {
        self.provenance
            .iter()
            .find(|s| s.start <= offset && offset < s.end)
            .map(|s| &s.node)
    }

    /// Machine-readable provenance sidecar.
    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            format: &'static str,
            language: &'a Language,
            offsets: &'static str,
            spans: &'a [Span],
        }
        let mut out = serde_json::to_string_pretty(&Sidecar {
            format: "taskdraft-provenance 1",
            language: &self.language,
            offsets: "chars",
            spans: &self.provenance,
        })
        .expect("provenance serializes");
        out.push('\n');
        out
    }
}

/// Renders plans with one lexicon and one set of language rules.
pub struct Realizer<'a> {
    pub model: &'a TaskModel,
    pub lexicon: &'a Lexicon,
    pub rules: &'a dyn LanguageRules,
}

// Guards against possessive chains looping through the lexicon.
const MAX_POSSESSIVE_DEPTH: usize = 4;

impl<'a> Realizer<'a> {
    pub fn new(model: &'a TaskModel, lexicon: &'a Lexicon, rules: &'a dyn LanguageRules) -> Result<Self, RealizeError> {
        if lexicon.language != rules.language() {
            return Err(RealizeError::LanguageMismatch {
                lexicon: lexicon.language.clone(),
                rules: rules.language(),
            });
        }
        Ok(Self { model, lexicon, rules })
    }

    fn missing(&self, concept: &str, form: &str) -> RealizeError {
        RealizeError::MissingLexeme {
            concept: concept.to_string(),
            language: self.lexicon.language.clone(),
            form: form.to_string(),
        }
    }

    fn action(&self, id: &NodeId) -> Result<&'a ActionComplex, RealizeError> {
        let node = self
            .model
            .action(id.as_str())
            .ok_or_else(|| RealizeError::UnknownNode(id.clone()))?;
        if node.complex.open_slot.is_some() {
            return Err(RealizeError::UnfilledSlot(id.clone()));
        }
        Ok(&node.complex)
    }

    /// Noun entry for a concept, inherited from the nearest ancestor that has one.
    fn concept_noun(&self, concept: &str) -> Result<&'a NounEntry, RealizeError> {
        self.model
            .ancestors(concept)
            .find_map(|c| self.lexicon.noun(c.id.as_str()))
            .or_else(|| self.lexicon.noun(concept))
            .ok_or_else(|| self.missing(concept, "noun"))
    }

    fn noun_np(&self, noun: &NounEntry, name: Option<String>, depth: usize) -> Result<NounPhrase, RealizeError> {
        let article = match (noun.article, &name) {
            (ArticlePolicy::None, _) => Article::Bare,
            _ => Article::Definite,
        };
        let of = match (&noun.of, depth) {
            (Some(_), d) if d >= MAX_POSSESSIVE_DEPTH => return Err(self.missing(&noun.id, "non-cyclic possessor")),
            (Some(of), _) => Some(Box::new(self.noun_np(self.concept_noun(of)?, None, depth + 1)?)),
            (None, _) => None,
        };
        Ok(NounPhrase {
            lexeme: noun.id.clone(),
            head: noun.singular.clone(),
            name,
            article,
            gender: noun.gender,
            of,
        })
    }

    /// Noun phrase for a role filler. With `generic`, domain objects are
    /// introduced indefinitely by their concept ("a document").
    fn filler_np(&self, filler: &Filler, generic: bool) -> Result<NounPhrase, RealizeError> {
        match filler {
            Filler::Concept(id) => self.noun_np(self.concept_noun(id.as_str())?, None, 0),
            Filler::Instance(id) => {
                let inst = self
                    .model
                    .instance(id.as_str())
                    .ok_or_else(|| RealizeError::UnknownNode(id.as_str().into()))?;
                if self.model.is_domain_instance(id.as_str()) {
                    let noun = self.concept_noun(inst.concept.as_str())?;
                    if generic {
                        return Ok(NounPhrase {
                            article: Article::Indefinite,
                            of: None,
                            ..self.noun_np(noun, None, 0)?
                        });
                    }
                    let own = self.lexicon.noun(id.as_str()).unwrap_or(noun);
                    return self.noun_np(own, None, 0);
                }
                let name = self
                    .lexicon
                    .proper(id.as_str())
                    .map(str::to_string)
                    .or_else(|| inst.label.clone())
                    .ok_or_else(|| self.missing(id.as_str(), "name"))?;
                self.noun_np(self.concept_noun(inst.concept.as_str())?, Some(name), 0)
            }
        }
    }

    fn render_np(&self, np: &NounPhrase) -> Result<String, RealizeError> {
        self.rules
            .noun_phrase(np)
            .map_err(|form| self.missing(&np.lexeme, form))
    }

    fn parts(&self, complex: &'a ActionComplex, generic: bool) -> Result<ClauseParts<'a>, RealizeError> {
        let verb = self
            .lexicon
            .verb(complex.process.as_str())
            .ok_or_else(|| self.missing(complex.process.as_str(), "verb"))?;
        let actee = match &complex.actee {
            Some(f) => Some(self.render_np(&self.filler_np(f, generic)?)?),
            None => None,
        };
        let mut tail = Vec::new();
        if let Some(f) = &complex.source {
            tail.push(format!(
                "{} {}",
                self.rules.source_prep(),
                self.render_np(&self.filler_np(f, false)?)?
            ));
        }
        if let Some(f) = &complex.location {
            tail.push(format!(
                "{} {}",
                self.rules.location_prep(),
                self.render_np(&self.filler_np(f, false)?)?
            ));
        }
        Ok(ClauseParts { verb, actee, tail })
    }

    fn clause(&self, usage: VerbUse, complex: &'a ActionComplex) -> Result<String, RealizeError> {
        let parts = self.parts(complex, false)?;
        self.rules
            .clause(usage, &parts)
            .map_err(|form| self.missing(complex.process.as_str(), form))
    }

    /// Imperative for reader actions; actor + result form for system actions.
    fn action_sentence(&self, id: &NodeId) -> Result<String, RealizeError> {
        let complex = self.action(id)?;
        match &complex.actor {
            Actor::Agent(agent) => {
                let actor = self.render_np(&self.filler_np(&Filler::Instance(agent.clone()), false)?)?;
                let clause = self.clause(VerbUse::Result, complex)?;
                Ok(format!("{}.", capitalize(&format!("{actor} {clause}"))))
            }
            Actor::Reader => Ok(format!("{}.", capitalize(&self.clause(VerbUse::Step, complex)?))),
        }
    }

    /// Realizes one leaf act as a single sentence.
    pub fn realize_sentence(&self, act: &DiscourseAct) -> Result<(String, NodeId), RealizeError> {
        if !act.is_leaf() {
            return Err(RealizeError::NotALeaf(act.kind));
        }
        let source = act.source.clone().ok_or(RealizeError::NotALeaf(act.kind))?;
        let text = match act.kind {
            ActKind::Title => {
                let complex = self.action(&source)?;
                let parts = self.parts(complex, true)?;
                self.rules
                    .title(&parts)
                    .map_err(|form| self.missing(complex.process.as_str(), form))?
            }
            ActKind::Step | ActKind::Result | ActKind::WarningNote => self.action_sentence(&source)?,
            ActKind::Note => {
                let main = self.clause(VerbUse::NoteMain, self.action(&source)?)?;
                let methods = act
                    .via
                    .iter()
                    .map(|m| self.clause(VerbUse::NoteMethod, self.action(m)?))
                    .collect::<Result<Vec<_>, _>>()?;
                self.rules.note(&main, &methods, act.mode)
            }
            kind => return Err(RealizeError::NotALeaf(kind)),
        };
        Ok((text, source))
    }

    pub fn realize_document(&self, plan: &DocPlan) -> Result<RenderedDoc, RealizeError> {
        let mut out = Builder::default();
        if let Some(title) = plan.title() {
            let (text, node) = self.realize_sentence(title)?;
            out.sentence(&text, node, "title");
            out.raw("\n");
        }
        let steps = plan.steps();
        if !steps.is_empty() {
            out.raw("\n");
        }
        for (i, step) in steps.iter().enumerate() {
            let prefix = format!("{}. ", i + 1);
            let indent = " ".repeat(prefix.chars().count());
            out.raw(&prefix);
            let mut first = true;
            let mut line = |out: &mut Builder, text: &str, node: NodeId, act: &str| {
                if !first {
                    out.raw(&indent);
                }
                first = false;
                out.sentence(text, node, act);
                out.raw("\n");
            };
            match step.child(ActKind::AlternativeGroup) {
                Some(group) => {
                    for (j, alt) in group.children.iter().enumerate() {
                        if j > 0 {
                            out.raw(&indent);
                            out.raw(self.rules.separator());
                            out.raw("\n");
                        }
                        let (text, node) = self.realize_sentence(alt)?;
                        line(&mut out, &text, node, "alternative");
                    }
                }
                None => {
                    let leaf = DiscourseAct {
                        children: Vec::new(),
                        ..step.clone()
                    };
                    let (text, node) = self.realize_sentence(&leaf)?;
                    line(&mut out, &text, node, "step");
                }
            }
            for result in step.children.iter().filter(|c| c.kind == ActKind::Result) {
                let (text, node) = self.realize_sentence(result)?;
                line(&mut out, &text, node, "result");
            }
        }
        let notes: Vec<_> = plan.notes().collect();
        if !notes.is_empty() {
            out.raw("\n");
        }
        for note in notes {
            let (text, node) = self.realize_sentence(note)?;
            out.raw(BULLET);
            if note.kind == ActKind::WarningNote {
                out.raw(self.rules.warning_marker());
            }
            out.sentence(&text, node, note.kind.as_str());
            out.raw("\n");
        }
        Ok(RenderedDoc {
            language: self.lexicon.language.clone(),
            text: out.text,
            provenance: out.spans,
        })
    }
}

#[derive(Default)]
struct Builder {
    text: String,
    chars: usize,
    spans: Vec<Span>,
}

impl Builder {
    fn raw(&mut self, s: &str) {
        self.text.push_str(s);
        self.chars += s.chars().count();
    }

    fn sentence(&mut self, s: &str, node: NodeId, act: &str) {
        let start = self.chars;
        self.raw(s);
        self.spans.push(Span {
            start,
            end: self.chars,
            node,
            act: act.to_string(),
        });
    }
}

/// Convenience wrapper: realize `plan` with the given lexicon and rules.
pub fn realize_document(
    plan: &DocPlan,
    model: &TaskModel,
    lexicon: &Lexicon,
    rules: &dyn LanguageRules,
) -> Result<RenderedDoc, RealizeError> {
    Realizer::new(model, lexicon, rules)?.realize_document(plan)
}

pub fn realize_sentence(
    act: &DiscourseAct,
    model: &TaskModel,
    lexicon: &Lexicon,
    rules: &dyn LanguageRules,
) -> Result<(String, NodeId), RealizeError> {
    Realizer::new(model, lexicon, rules)?.realize_sentence(act)
}

#[cfg(test)]
mod tests;
