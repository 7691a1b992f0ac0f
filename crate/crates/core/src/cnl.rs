//! Controlled-language authoring of action complexes.
//!
//! The grammar is a list of context-free templates, one per way of phrasing a
//! process. Slots in a template carry a participant role and a concept
//! constraint; they are filled by instances or referable concepts subsumed by
//! that constraint. Authoring proceeds by expanding bracketed slots of a
//! [`Pattern`] until it is ground.
//!
//! Grammar file:
//!
//! ```text
//! taskdraft-grammar 1
//! save: reader save {actee:information}
//! choose: reader choose {actee:menu-option} from {source:menu}
//! display: {actor:application-program} display {actee:window-object}
//! ```
//!
//! Templates without an `actor` slot describe reader actions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ids::ConceptId;
use crate::kb::{ActionComplex, Actor, Filler, Role, TaskModel, ACTION_CONCEPT};

pub const GRAMMAR_HEADER: &str = "taskdraft-grammar";

/// Upper bound on ground sentences produced by [`Cnl::enumerate_ground`].
pub const ENUMERATION_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateToken {
    Word(String),
    Slot { role: Role, constraint: ConceptId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub process: ConceptId,
    pub tokens: Vec<TemplateToken>,
}

impl Production {
    fn actor_slot(&self) -> bool {
        self.tokens
            .iter()
            .any(|t| matches!(t, TemplateToken::Slot { role: Role::Actor, .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grammar {
    pub productions: Vec<Production>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct GrammarError {
    pub line: usize,
    pub message: String,
}

impl Grammar {
    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let mut productions = Vec::new();
        let mut header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| GrammarError { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if !header {
                if content.split_whitespace().collect::<Vec<_>>() != [GRAMMAR_HEADER, "1"] {
                    return Err(err(format!("expected `{GRAMMAR_HEADER} 1` header")));
                }
                header = true;
                continue;
            }
            let (process, template) = content
                .split_once(':')
                .ok_or_else(|| err("expected `<process>: <template>`".into()))?;
            let process = process.trim();
            if process.is_empty() || process.contains(char::is_whitespace) {
                return Err(err(format!("bad process `{process}`")));
            }
            let mut tokens = Vec::new();
            let mut roles = BTreeSet::new();
            for word in template.split_whitespace() {
                if let Some(inner) = word.strip_prefix('{') {
                    let inner = inner
                        .strip_suffix('}')
                        .ok_or_else(|| err(format!("unterminated slot `{word}`")))?;
                    let (role, constraint) = inner
                        .split_once(':')
                        .ok_or_else(|| err(format!("slot `{word}` needs role:concept")))?;
                    let role = Role::parse(role)
                        .filter(|r| *r != Role::Means)
                        .ok_or_else(|| err(format!("unsupported role `{role}`")))?;
                    if !roles.insert(role) {
                        return Err(err(format!("role `{role}` used twice")));
                    }
                    tokens.push(TemplateToken::Slot {
                        role,
                        constraint: constraint.into(),
                    });
                } else if word.contains(['{', '}', '[', ']']) {
                    return Err(err(format!("bad word `{word}`")));
                } else {
                    tokens.push(TemplateToken::Word(word.to_string()));
                }
            }
            if tokens.is_empty() {
                return Err(err("empty template".into()));
            }
            productions.push(Production {
                process: process.into(),
                tokens,
            });
        }
        if !header {
            return Err(GrammarError {
                line: 1,
                message: format!("missing `{GRAMMAR_HEADER} 1` header"),
            });
        }
        Ok(Grammar { productions })
    }

    /// Problems with the grammar against a model's concept hierarchy.
    pub fn check(&self, model: &TaskModel) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.productions {
            if !model.is_a(p.process.as_str(), ACTION_CONCEPT) {
                out.push(format!("process `{}` is not an action concept", p.process));
            }
            for t in &p.tokens {
                if let TemplateToken::Slot { constraint, .. } = t {
                    if model.concept(constraint.as_str()).is_none() {
                        out.push(format!("unknown slot concept `{constraint}`"));
                    }
                }
            }
        }
        out
    }
}

/// An open position in a pattern, shown as `[label]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub name: String,
    pub constraint: ConceptId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternToken {
    Word(String),
    Slot(Slot),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub tokens: Vec<PatternToken>,
}

fn join_tokens(tokens: &[PatternToken]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match t {
            PatternToken::Word(w) => out.push_str(w),
            PatternToken::Slot(s) => {
                out.push('[');
                out.push_str(&s.name);
                out.push(']');
            }
        }
    }
    out
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_tokens(&self.tokens))
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Pattern {
    /// Reads `reader save [information]`; bracketed text names a concept by
    /// label or id.
    pub fn parse(text: &str, model: &TaskModel) -> Result<Self, CnlError> {
        let mut tokens = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            if let Some(after) = rest.strip_prefix('[') {
                let end = after
                    .find(']')
                    .ok_or_else(|| CnlError::BadPattern(format!("unclosed `[` in `{text}`")))?;
                let name = after[..end].trim();
                let concept = lookup_concept(model, name).ok_or_else(|| CnlError::UnknownConcept(name.to_string()))?;
                tokens.push(PatternToken::Slot(slot_for(model, &concept)));
                rest = after[end + 1..].trim_start();
            } else {
                let end = rest.find(|c: char| c.is_whitespace() || c == '[').unwrap_or(rest.len());
                let word = &rest[..end];
                if word.contains(']') {
                    return Err(CnlError::BadPattern(format!("stray `]` in `{text}`")));
                }
                tokens.push(PatternToken::Word(word.to_string()));
                rest = rest[end..].trim_start();
            }
        }
        if tokens.is_empty() {
            return Err(CnlError::BadPattern("empty pattern".into()));
        }
        Ok(Pattern { tokens })
    }

    pub fn slots(&self) -> impl Iterator<Item = (usize, &Slot)> {
        self.tokens.iter().enumerate().filter_map(|(i, t)| match t {
            PatternToken::Slot(s) => Some((i, s)),
            PatternToken::Word(_) => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.slots().next().is_none()
    }

    fn replace(&self, position: usize, with: &[PatternToken]) -> Pattern {
        let mut tokens = self.tokens[..position].to_vec();
        tokens.extend_from_slice(with);
        tokens.extend_from_slice(&self.tokens[position + 1..]);
        Pattern { tokens }
    }
}

fn lookup_concept(model: &TaskModel, name: &str) -> Option<ConceptId> {
    model
        .concepts()
        .find(|c| c.label == name)
        .or_else(|| model.concept(name))
        .or_else(|| model.concept(&name.replace(' ', "-")))
        .map(|c| c.id.clone())
}

fn slot_for(model: &TaskModel, concept: &ConceptId) -> Slot {
    Slot {
        name: model
            .concept(concept.as_str())
            .map_or_else(|| concept.to_string(), |c| c.label.clone()),
        constraint: concept.clone(),
    }
}

/// CNL surface of an instance or concept id.
pub fn surface_name(id: &str) -> String {
    id.replace('-', " ")
}

/// One way of filling a slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expansion {
    /// Text substituted for the slot, e.g. `[document]` or `current document`.
    pub replacement: String,
    /// The whole resulting pattern.
    pub pattern: Pattern,
}

/// A fully expanded sentence and the complex it denotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSentence {
    pub tokens: Vec<String>,
    pub complex: ActionComplex,
}

impl fmt::Display for GroundSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnlError {
    #[error("not-a-slot: pattern has no slot #{0}")]
    NotASlot(usize),
    #[error("no-ground-form: `{0}` cannot be completed")]
    NoGroundForm(String),
    #[error("not-in-grammar: no reading at word {position} (`{word}`)")]
    NotInGrammar { position: usize, word: String },
    #[error("ambiguous: {} parses", .0.len())]
    Ambiguous(Vec<ActionComplex>),
    #[error("unrenderable: {0}")]
    Unrenderable(String),
    #[error("unknown-concept: `{0}`")]
    UnknownConcept(String),
    #[error("bad-pattern: {0}")]
    BadPattern(String),
    #[error("enumeration-limit: more than {0} ground sentences")]
    TooMany(usize),
}

impl CnlError {
    pub fn code(&self) -> &'static str {
        match self {
            CnlError::NotASlot(_) => "not-a-slot",
            CnlError::NoGroundForm(_) => "no-ground-form",
            CnlError::NotInGrammar { .. } => "not-in-grammar",
            CnlError::Ambiguous(_) => "ambiguous",
            CnlError::Unrenderable(_) => "unrenderable",
            CnlError::UnknownConcept(_) => "unknown-concept",
            CnlError::BadPattern(_) => "bad-pattern",
            CnlError::TooMany(_) => "enumeration-limit",
        }
    }
}

/// Grammar engine bound to a model. All operations are read-only.
#[derive(Debug, Clone, Copy)]
pub struct Cnl<'a> {
    pub grammar: &'a Grammar,
    pub model: &'a TaskModel,
}

impl<'a> Cnl<'a> {
    pub fn new(grammar: &'a Grammar, model: &'a TaskModel) -> Self {
        Self { grammar, model }
    }

    fn is_action_slot(&self, concept: &str) -> bool {
        self.model.is_a(concept, ACTION_CONCEPT)
    }

    /// Instances and referable concepts subsumed by `constraint`, with their
    /// surface names.
    fn fillers_under(&self, constraint: &str) -> Vec<(String, Filler)> {
        let instances = self
            .model
            .instances()
            .filter(|i| self.model.is_a(i.concept.as_str(), constraint))
            .map(|i| (surface_name(i.id.as_str()), Filler::Instance(i.id.clone())));
        let concepts = self
            .model
            .concepts()
            .filter(|c| c.referable && self.model.is_a(c.id.as_str(), constraint))
            .map(|c| (surface_name(c.id.as_str()), Filler::Concept(c.id.clone())));
        instances.chain(concepts).collect()
    }

    fn slot_live(&self, concept: &str) -> bool {
        if self.is_action_slot(concept) {
            self.grammar
                .productions
                .iter()
                .any(|p| self.model.is_a(p.process.as_str(), concept) && self.production_live(p))
        } else {
            !self.fillers_under(concept).is_empty()
        }
    }

    fn production_live(&self, p: &Production) -> bool {
        p.tokens.iter().all(|t| match t {
            TemplateToken::Word(_) => true,
            TemplateToken::Slot { constraint, .. } => {
                !self.is_action_slot(constraint.as_str()) && self.slot_live(constraint.as_str())
            }
        })
    }

    fn production_pattern(&self, p: &Production) -> Vec<PatternToken> {
        p.tokens
            .iter()
            .map(|t| match t {
                TemplateToken::Word(w) => PatternToken::Word(w.clone()),
                TemplateToken::Slot { constraint, .. } => PatternToken::Slot(slot_for(self.model, constraint)),
            })
            .collect()
    }

    /// Live replacements for the `slot_index`-th slot (counting slots only),
    /// sorted by the resulting pattern's surface text.
    pub fn expansions(&self, pattern: &Pattern, slot_index: usize) -> Result<Vec<Expansion>, CnlError> {
        let (position, slot) = pattern.slots().nth(slot_index).ok_or(CnlError::NotASlot(slot_index))?;
        let constraint = slot.constraint.as_str();
        let mut replacements: Vec<Vec<PatternToken>> = Vec::new();
        if self.is_action_slot(constraint) {
            for p in &self.grammar.productions {
                if self.model.is_a(p.process.as_str(), constraint) && self.production_live(p) {
                    replacements.push(self.production_pattern(p));
                }
            }
        } else {
            for child in self.model.children(constraint) {
                if self.slot_live(child.id.as_str()) {
                    replacements.push(vec![PatternToken::Slot(slot_for(self.model, &child.id))]);
                }
            }
            for inst in self.model.instances() {
                if inst.concept.as_str() == constraint {
                    replacements.push(words(&surface_name(inst.id.as_str())));
                }
            }
            if self.model.concept(constraint).is_some_and(|c| c.referable) {
                replacements.push(words(&surface_name(constraint)));
            }
        }
        let mut out: Vec<Expansion> = replacements
            .into_iter()
            .map(|r| Expansion {
                replacement: join_tokens(&r),
                pattern: pattern.replace(position, &r),
            })
            .collect();
        out.sort_by_key(|e| e.pattern.to_string());
        out.dedup_by(|a, b| a.pattern == b.pattern);
        Ok(out)
    }

    /// Takes the first expansion at the leftmost slot until the pattern is
    /// ground, then parses the result.
    pub fn default_completion(&self, pattern: &Pattern) -> Result<GroundSentence, CnlError> {
        let mut current = pattern.clone();
        while !current.is_ground() {
            let first = self.expansions(&current, 0)?.into_iter().next();
            current = match first {
                Some(e) => e.pattern,
                None => return Err(CnlError::NoGroundForm(pattern.to_string())),
            };
        }
        let text = current.to_string();
        let complex = self.parse(&text)?;
        Ok(GroundSentence {
            tokens: text.split(' ').map(str::to_string).collect(),
            complex,
        })
    }

    /// Parses a ground sentence into the complex it denotes.
    pub fn parse(&self, sentence: &str) -> Result<ActionComplex, CnlError> {
        let words: Vec<&str> = sentence.split_whitespace().collect();
        let mut parses = Vec::new();
        let mut furthest = 0;
        for p in &self.grammar.productions {
            let mut bindings = Vec::new();
            self.match_tokens(p, 0, &words, 0, &mut bindings, &mut parses, &mut furthest);
        }
        match parses.len() {
            0 => Err(CnlError::NotInGrammar {
                position: furthest,
                word: words.get(furthest).map_or_else(|| "<end>".into(), |w| w.to_string()),
            }),
            1 => Ok(parses.pop().unwrap()),
            _ => Err(CnlError::Ambiguous(parses)),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn match_tokens(
        &self,
        p: &Production,
        ti: usize,
        words: &[&str],
        wi: usize,
        bindings: &mut Vec<(Role, Filler)>,
        out: &mut Vec<ActionComplex>,
        furthest: &mut usize,
    ) {
        *furthest = (*furthest).max(wi);
        let Some(token) = p.tokens.get(ti) else {
            if wi == words.len() {
                out.push(self.build_complex(p, bindings));
            }
            return;
        };
        match token {
            TemplateToken::Word(w) => {
                if words.get(wi) == Some(&w.as_str()) {
                    self.match_tokens(p, ti + 1, words, wi + 1, bindings, out, furthest);
                }
            }
            TemplateToken::Slot { role, constraint } => {
                if self.is_action_slot(constraint.as_str()) {
                    return;
                }
                for (name, filler) in self.fillers_under(constraint.as_str()) {
                    if *role == Role::Actor && !matches!(filler, Filler::Instance(_)) {
                        continue;
                    }
                    let n = name.split(' ').count();
                    if wi + n <= words.len() && words[wi..wi + n].join(" ") == name {
                        bindings.push((*role, filler));
                        self.match_tokens(p, ti + 1, words, wi + n, bindings, out, furthest);
                        bindings.pop();
                    }
                }
            }
        }
    }

    fn build_complex(&self, p: &Production, bindings: &[(Role, Filler)]) -> ActionComplex {
        let mut complex = ActionComplex::new(p.process.clone(), Actor::Reader);
        for (role, filler) in bindings {
            match (role, filler) {
                (Role::Actor, Filler::Instance(id)) => complex.actor = Actor::Agent(id.clone()),
                (role, filler) => complex.set_filler(*role, filler.clone()),
            }
        }
        complex
    }

    /// Canonical sentence for a complex: the first template that reproduces
    /// it. Open slots render as `[label]`.
    pub fn render(&self, complex: &ActionComplex) -> Result<String, CnlError> {
        if complex.means.is_some() {
            return Err(CnlError::Unrenderable("the means role has no CNL phrasing".into()));
        }
        let filled: BTreeSet<Role> = complex
            .fillers()
            .map(|(r, _)| r)
            .chain(complex.open_slot.iter().map(|s| s.role))
            .collect();
        'productions: for p in &self.grammar.productions {
            if p.process != complex.process {
                continue;
            }
            if p.actor_slot() == matches!(complex.actor, Actor::Reader) {
                continue;
            }
            let template_roles: BTreeSet<Role> = p
                .tokens
                .iter()
                .filter_map(|t| match t {
                    TemplateToken::Slot { role, .. } if *role != Role::Actor => Some(*role),
                    _ => None,
                })
                .collect();
            if template_roles != filled {
                continue;
            }
            let mut out = Vec::new();
            for t in &p.tokens {
                match t {
                    TemplateToken::Word(w) => out.push(w.clone()),
                    TemplateToken::Slot {
                        role: Role::Actor,
                        constraint,
                    } => match &complex.actor {
                        Actor::Agent(id)
                            if self
                                .model
                                .instance(id.as_str())
                                .is_some_and(|i| self.model.is_a(i.concept.as_str(), constraint.as_str())) =>
                        {
                            out.push(surface_name(id.as_str()))
                        }
                        _ => continue 'productions,
                    },
                    TemplateToken::Slot { role, constraint } => {
                        if let Some(slot) = complex.open_slot.as_ref().filter(|s| s.role == *role) {
                            if !self.model.is_a(slot.concept.as_str(), constraint.as_str()) {
                                continue 'productions;
                            }
                            out.push(format!("[{}]", slot_for(self.model, &slot.concept).name));
                            continue;
                        }
                        let Some(filler) = complex.filler(*role) else {
                            continue 'productions;
                        };
                        match self.model.filler_concept(filler) {
                            Some(c) if self.model.is_a(c.as_str(), constraint.as_str()) => {
                                out.push(surface_name(filler.as_str()))
                            }
                            _ => continue 'productions,
                        }
                    }
                }
            }
            return Ok(out.join(" "));
        }
        Err(CnlError::Unrenderable(format!(
            "no template phrases `{}` with these roles",
            complex.process
        )))
    }

    /// Every ground sentence reachable from `[action]`, in sorted order.
    pub fn enumerate_ground(&self) -> Result<Vec<String>, CnlError> {
        let start = Pattern {
            tokens: vec![PatternToken::Slot(slot_for(
                self.model,
                &ConceptId::from(ACTION_CONCEPT),
            ))],
        };
        let mut ground = BTreeSet::new();
        let mut stack = vec![start];
        let mut seen = BTreeSet::new();
        while let Some(p) = stack.pop() {
            if p.is_ground() {
                ground.insert(p.to_string());
                if ground.len() > ENUMERATION_LIMIT {
                    return Err(CnlError::TooMany(ENUMERATION_LIMIT));
                }
                continue;
            }
            for e in self.expansions(&p, 0)? {
                if seen.insert(e.pattern.clone()) {
                    stack.push(e.pattern);
                }
            }
        }
        Ok(ground.into_iter().collect())
    }
}

fn words(text: &str) -> Vec<PatternToken> {
    text.split(' ').map(|w| PatternToken::Word(w.to_string())).collect()
}
