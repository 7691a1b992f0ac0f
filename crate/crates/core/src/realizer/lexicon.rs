//! Per-language lexicon files.
//!
//! ```text
//! taskdraft-lexicon 1 fr
//! verb click infinitive="cliquer" future-3sg="cliquera" prep="sur"
//! noun dialog-box singular="zone de dialogue" gender=f article=definite
//! noun folder singular="fichier" gender=m article=possessive-of of=document
//! proper save-as name="Enregistrer Sous"
//! ```
//!
//! Verb and noun entries are keyed by concept id (noun entries may also be
//! keyed by an instance id to override the concept's noun); proper entries by
//! instance id. Which verb forms must be present depends on the language
//! rules, so any `key=value` on a verb line is accepted as a form.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{tokenize, Pairs};

pub const LEXICON_HEADER: &str = "taskdraft-lexicon";

/// Language code, e.g. `en`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Language(String);

impl Language {
    pub fn new(code: impl Into<String>) -> Self {
        Language(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gender {
    M,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArticlePolicy {
    Definite,
    None,
    PossessiveOf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbEntry {
    pub concept: String,
    pub forms: BTreeMap<String, String>,
    /// Preposition introducing the actee ("click on the icon").
    pub prep: Option<String>,
}

impl VerbEntry {
    pub fn form(&self, name: &str) -> Option<&str> {
        self.forms.get(name).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounEntry {
    pub id: String,
    pub singular: String,
    pub gender: Option<Gender>,
    pub article: ArticlePolicy,
    /// Possessor concept for `possessive-of`.
    pub of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub language: Language,
    verbs: BTreeMap<String, VerbEntry>,
    nouns: BTreeMap<String, NounEntry>,
    propers: BTreeMap<String, String>,
}

impl Lexicon {
    pub fn new(language: Language) -> Self {
        Self {
            language,
            verbs: BTreeMap::new(),
            nouns: BTreeMap::new(),
            propers: BTreeMap::new(),
        }
    }

    pub fn verb(&self, concept: &str) -> Option<&VerbEntry> {
        self.verbs.get(concept)
    }

    pub fn noun(&self, id: &str) -> Option<&NounEntry> {
        self.nouns.get(id)
    }

    pub fn proper(&self, instance: &str) -> Option<&str> {
        self.propers.get(instance).map(String::as_str)
    }

    pub fn insert_verb(&mut self, entry: VerbEntry) {
        self.verbs.insert(entry.concept.clone(), entry);
    }

    pub fn insert_noun(&mut self, entry: NounEntry) {
        self.nouns.insert(entry.id.clone(), entry);
    }

    pub fn insert_proper(&mut self, instance: impl Into<String>, name: impl Into<String>) {
        self.propers.insert(instance.into(), name.into());
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lexicon: Option<Lexicon> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| LexiconError { line, message };
            let tokens = tokenize(raw).map_err(err)?;
            if tokens.is_empty() {
                continue;
            }
            let (positional, mut pairs) = Pairs::from_tokens(tokens).map_err(err)?;
            let words: Vec<&str> = positional.iter().filter_map(|t| t.text()).collect();
            let Some(lex) = lexicon.as_mut() else {
                let [LEXICON_HEADER, "1", code] = words.as_slice() else {
                    return Err(err(format!("expected `{LEXICON_HEADER} 1 <language>` header")));
                };
                lexicon = Some(Lexicon::new(Language::new(*code)));
                continue;
            };
            let [category, id] = words.as_slice() else {
                return Err(err("expected `<verb|noun|proper> <id> key=value ...`".into()));
            };
            let id = id.to_string();
            let duplicate = match *category {
                "verb" => {
                    let prep = pairs.take("prep");
                    let forms: BTreeMap<_, _> = pairs.into_vec().into_iter().collect();
                    if forms.is_empty() {
                        return Err(err(format!("verb `{id}` has no forms")));
                    }
                    lex.verbs
                        .insert(
                            id.clone(),
                            VerbEntry {
                                concept: id.clone(),
                                forms,
                                prep,
                            },
                        )
                        .is_some()
                }
                "noun" => {
                    let singular = pairs.require("singular").map_err(err)?;
                    let gender = match pairs.take("gender").as_deref() {
                        None => None,
                        Some("m") => Some(Gender::M),
                        Some("f") => Some(Gender::F),
                        Some(other) => return Err(err(format!("unknown gender `{other}`"))),
                    };
                    let article = match pairs.take("article").as_deref() {
                        None | Some("definite") => ArticlePolicy::Definite,
                        Some("none") => ArticlePolicy::None,
                        Some("possessive-of") => ArticlePolicy::PossessiveOf,
                        Some(other) => return Err(err(format!("unknown article policy `{other}`"))),
                    };
                    let of = pairs.take("of");
                    if (article == ArticlePolicy::PossessiveOf) != of.is_some() {
                        return Err(err("`of=` goes with, and only with, article=possessive-of".into()));
                    }
                    pairs.finish().map_err(err)?;
                    lex.nouns
                        .insert(
                            id.clone(),
                            NounEntry {
                                id: id.clone(),
                                singular,
                                gender,
                                article,
                                of,
                            },
                        )
                        .is_some()
                }
                "proper" => {
                    let name = pairs.require("name").map_err(err)?;
                    pairs.finish().map_err(err)?;
                    lex.propers.insert(id.clone(), name).is_some()
                }
                other => return Err(err(format!("unknown entry category `{other}`"))),
            };
            if duplicate {
                return Err(err(format!("duplicate {category} entry `{id}`")));
            }
        }
        lexicon.ok_or(LexiconError {
            line: 1,
            message: format!("missing `{LEXICON_HEADER} 1 <language>` header"),
        })
    }
}
