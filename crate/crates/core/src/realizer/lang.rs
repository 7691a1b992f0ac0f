//! Sentence-construction rules for each output language.
//!
//! The generic realizer resolves lexemes and assembles clause parts; a
//! [`LanguageRules`] implementation decides word order, articles, verb forms
//! and the fixed phrases around them. Adding a language means adding a
//! lexicon and one implementation of this trait.

use crate::kb::Decomposition;

use super::lexicon::{Gender, Language, VerbEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Article {
    Definite,
    Indefinite,
    Bare,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounPhrase {
    /// Lexicon entry the head came from; named in missing-form errors.
    pub lexeme: String,
    /// Common noun, e.g. "dialog box". For bare phrases without a name this
    /// is the whole phrase.
    pub head: String,
    /// Proper name of the referent, e.g. "Save As".
    pub name: Option<String>,
    pub article: Article,
    pub gender: Option<Gender>,
    pub of: Option<Box<NounPhrase>>,
}

/// Where a verb form is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbUse {
    Step,
    Result,
    NoteMain,
    NoteMethod,
    Title,
}

/// A missing piece of lexical information, named by its form.
pub type MissingForm = &'static str;

/// Clause material before assembly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseParts<'a> {
    pub verb: &'a VerbEntry,
    pub actee: Option<String>,
    /// Prepositional phrases after the actee, already realized.
    pub tail: Vec<String>,
}

pub trait LanguageRules: Send + Sync {
    fn language(&self) -> Language;
    fn verb_form(&self, usage: VerbUse) -> &'static str;
    fn noun_phrase(&self, np: &NounPhrase) -> Result<String, MissingForm>;
    fn source_prep(&self) -> &'static str;
    fn location_prep(&self) -> &'static str;
    fn title(&self, parts: &ClauseParts<'_>) -> Result<String, MissingForm>;
    fn note(&self, main: &str, methods: &[String], mode: Option<Decomposition>) -> String;
    fn separator(&self) -> &'static str;
    fn warning_marker(&self) -> &'static str;

    /// Verb, preposition, actee and tail in this language's order.
    fn clause(&self, usage: VerbUse, parts: &ClauseParts<'_>) -> Result<String, MissingForm> {
        let form = self.verb_form(usage);
        let verb = parts.verb.form(form).ok_or(form)?;
        let mut words = vec![verb.to_string()];
        if let Some(actee) = &parts.actee {
            if let Some(prep) = &parts.verb.prep {
                words.push(prep.clone());
            }
            words.push(actee.clone());
        }
        words.extend(parts.tail.iter().cloned());
        Ok(words.join(" "))
    }
}

pub fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn starts_with_vowel(text: &str) -> bool {
    text.chars()
        .next()
        .is_some_and(|c| "aeiouhàâäéèêëîïôöùûüAEIOUHÀÂÉÈÊÎÔÛ".contains(c))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct English;

const EN_MINOR_WORDS: &[&str] = &[
    "a", "an", "and", "as", "by", "for", "from", "in", "of", "on", "or", "the", "to",
];

/// Capitalizes every word except short function words (the first word is
/// always capitalized). Existing capitals are kept.
pub fn headline(text: &str) -> String {
    text.split(' ')
        .enumerate()
        .map(|(i, w)| {
            if i > 0 && EN_MINOR_WORDS.contains(&w) {
                w.to_string()
            } else {
                capitalize(w)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl LanguageRules for English {
    fn language(&self) -> Language {
        Language::new("en")
    }

    fn verb_form(&self, usage: VerbUse) -> &'static str {
        match usage {
            VerbUse::Step | VerbUse::NoteMain | VerbUse::Title => "base",
            VerbUse::Result => "third-singular",
            VerbUse::NoteMethod => "gerund",
        }
    }

    fn noun_phrase(&self, np: &NounPhrase) -> Result<String, MissingForm> {
        let core = match (np.article, &np.name) {
            (Article::Bare, Some(name)) => name.clone(),
            (Article::Bare, None) => np.head.clone(),
            (article, name) => {
                let body = match name {
                    Some(name) => format!("{name} {}", np.head),
                    None => np.head.clone(),
                };
                let art = match article {
                    Article::Definite => "the",
                    _ if body.starts_with(['a', 'e', 'i', 'o', 'u', 'A', 'E', 'I', 'O', 'U']) => "an",
                    _ => "a",
                };
                format!("{art} {body}")
            }
        };
        Ok(match &np.of {
            Some(of) => format!("{core} of {}", self.noun_phrase(of)?),
            None => core,
        })
    }

    fn source_prep(&self) -> &'static str {
        "from"
    }

    fn location_prep(&self) -> &'static str {
        "in"
    }

    fn title(&self, parts: &ClauseParts<'_>) -> Result<String, MissingForm> {
        Ok(format!("To {}", headline(&self.clause(VerbUse::Title, parts)?)))
    }

    fn note(&self, main: &str, methods: &[String], mode: Option<Decomposition>) -> String {
        if methods.is_empty() {
            return format!("You can {main}.");
        }
        let joiner = match mode {
            Some(Decomposition::Choice) => " or ",
            _ => " and then ",
        };
        format!("You can {main} by {}.", methods.join(joiner))
    }

    fn separator(&self) -> &'static str {
        "-OR-"
    }

    fn warning_marker(&self) -> &'static str {
        "Warning: "
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct French;

impl French {
    fn article(np: &NounPhrase, next: &str) -> Result<String, MissingForm> {
        Ok(match np.article {
            Article::Bare => String::new(),
            Article::Definite if starts_with_vowel(next) => "l'".into(),
            Article::Definite => match np.gender.ok_or("gender")? {
                Gender::M => "le ".into(),
                Gender::F => "la ".into(),
            },
            Article::Indefinite => match np.gender.ok_or("gender")? {
                Gender::M => "un ".into(),
                Gender::F => "une ".into(),
            },
        })
    }
}

/// `de` + noun phrase with the usual contractions: du, de la, de l', des, d'un.
pub fn french_de(np: &str) -> String {
    if let Some(rest) = np.strip_prefix("le ") {
        format!("du {rest}")
    } else if let Some(rest) = np.strip_prefix("les ") {
        format!("des {rest}")
    } else if starts_with_vowel(np) {
        format!("d'{np}")
    } else {
        format!("de {np}")
    }
}

impl LanguageRules for French {
    fn language(&self) -> Language {
        Language::new("fr")
    }

    fn verb_form(&self, usage: VerbUse) -> &'static str {
        match usage {
            VerbUse::Step | VerbUse::NoteMain => "infinitive",
            VerbUse::Result => "future-3sg",
            VerbUse::NoteMethod => "present-participle",
            VerbUse::Title => "event-noun",
        }
    }

    fn noun_phrase(&self, np: &NounPhrase) -> Result<String, MissingForm> {
        let core = match (np.article, &np.name) {
            (Article::Bare, Some(name)) => name.clone(),
            (_, name) => {
                let body = match name {
                    Some(name) => format!("{} {name}", np.head),
                    None => np.head.clone(),
                };
                format!("{}{body}", Self::article(np, &body)?)
            }
        };
        Ok(match &np.of {
            Some(of) => format!("{core} {}", french_de(&self.noun_phrase(of)?)),
            None => core,
        })
    }

    fn source_prep(&self) -> &'static str {
        "dans"
    }

    fn location_prep(&self) -> &'static str {
        "dans"
    }

    // Nominalization: "Enregistrement d'un document".
    fn title(&self, parts: &ClauseParts<'_>) -> Result<String, MissingForm> {
        let form = self.verb_form(VerbUse::Title);
        let noun = parts.verb.form(form).ok_or(form)?;
        let mut words = vec![capitalize(noun)];
        if let Some(actee) = &parts.actee {
            words.push(french_de(actee));
        }
        words.extend(parts.tail.iter().cloned());
        Ok(words.join(" "))
    }

    fn note(&self, main: &str, methods: &[String], mode: Option<Decomposition>) -> String {
        if methods.is_empty() {
            return format!("Vous pouvez {main}.");
        }
        let joiner = match mode {
            Some(Decomposition::Choice) => " ou en ",
            _ => " puis en ",
        };
        format!("Vous pouvez {main} en {}.", methods.join(joiner))
    }

    fn separator(&self) -> &'static str {
        "-OU BIEN-"
    }

    fn warning_marker(&self) -> &'static str {
        "Attention : "
    }
}

/// Rules for the built-in languages.
pub fn builtin_rules(language: &Language) -> Option<Box<dyn LanguageRules>> {
    match language.as_str() {
        "en" => Some(Box::new(English)),
        "fr" => Some(Box::new(French)),
        _ => None,
    }
}
