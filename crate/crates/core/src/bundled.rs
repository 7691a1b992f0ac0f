//! Files shipped with the crate: base ontology, default derivation rules,
//! CNL grammar, lexicons, and the word-processor example with its goldens.

use crate::cnl::Grammar;
use crate::kb::TaskModel;
use crate::realizer::{Language, Lexicon};
use crate::uispec::RuleTable;

pub const BASE_KB: &str = include_str!("../data/base.kb");
pub const DEFAULT_RULES: &str = include_str!("../data/default.rules");
pub const CNL_GRAMMAR: &str = include_str!("../data/cnl.grammar");
pub const EN_LEXICON: &str = include_str!("../data/en.lex");
pub const FR_LEXICON: &str = include_str!("../data/fr.lex");
pub const WORD_UISPEC: &str = include_str!("../data/word.uispec");
pub const SAVE_SCRIPT: &str = include_str!("../data/save.author");
pub const GOLDEN_EN: &str = include_str!("../data/goldens/save-a-document.en.txt");
pub const GOLDEN_FR: &str = include_str!("../data/goldens/save-a-document.fr.txt");

pub fn base_model() -> TaskModel {
    TaskModel::from_text(BASE_KB).expect("bundled base.kb parses")
}

pub fn default_rules() -> RuleTable {
    RuleTable::parse(DEFAULT_RULES).expect("bundled default.rules parses")
}

pub fn grammar() -> Grammar {
    Grammar::parse(CNL_GRAMMAR).expect("bundled grammar parses")
}

pub fn lexicon(language: &Language) -> Option<Lexicon> {
    let text = match language.as_str() {
        "en" => EN_LEXICON,
        "fr" => FR_LEXICON,
        _ => return None,
    };
    Some(Lexicon::parse(text).expect("bundled lexicon parses"))
}
