//! End-to-end steps shared by the command line and the service: ingest a UI
//! specification, apply an author script, draft instructions.

use thiserror::Error;

use crate::bundled;
use crate::cnl::Grammar;
use crate::kb::{TaskModel, Violation};
use crate::planner::{plan_document, PlanError};
use crate::realizer::{builtin_rules, realize_document, Language, Lexicon, RealizeError, RenderedDoc};
use crate::script::{AuthorScript, ScriptError};
use crate::uispec::{derive_instances, parse_uispec, Derivation, DeriveError, RuleTable, UispecError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Uispec(#[from] UispecError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
}

/// Derives interface objects and actions from a UI specification into a copy
/// of `base`.
pub fn ingest(uispec: &str, rules: &RuleTable, base: &TaskModel) -> Result<(TaskModel, Derivation), IngestError> {
    let tree = parse_uispec(uispec)?;
    let derivation = derive_instances(&tree, rules, base)?;
    let mut model = base.clone();
    derivation.apply(&mut model).map_err(DeriveError::from)?;
    Ok((model, derivation))
}

#[derive(Debug, Error)]
pub enum DraftError {
    #[error("invalid model: {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Plan(PlanError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(Language),
}

impl From<PlanError> for DraftError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Invalid(v) => DraftError::Invalid(v),
            other => DraftError::Plan(other),
        }
    }
}

/// Plans `goal` and realizes it in each language, using `lexicons` where
/// given and the bundled lexicon otherwise.
pub fn draft(
    model: &TaskModel,
    goal: &str,
    languages: &[Language],
    lexicons: &[Lexicon],
) -> Result<Vec<RenderedDoc>, DraftError> {
    let plan = plan_document(model, goal)?;
    languages
        .iter()
        .map(|lang| {
            let rules = builtin_rules(lang).ok_or_else(|| DraftError::UnsupportedLanguage(lang.clone()))?;
            let bundled_lex;
            let lexicon = match lexicons.iter().find(|l| &l.language == lang) {
                Some(l) => l,
                None => {
                    bundled_lex =
                        bundled::lexicon(lang).ok_or_else(|| DraftError::UnsupportedLanguage(lang.clone()))?;
                    &bundled_lex
                }
            };
            Ok(realize_document(&plan, model, lexicon, rules.as_ref())?)
        })
        .collect()
}

/// The bundled word-processor specification derived into the base model.
pub fn derived_example() -> TaskModel {
    ingest(bundled::WORD_UISPEC, &bundled::default_rules(), &bundled::base_model())
        .expect("bundled example derives")
        .0
}

/// The complete bundled example: derivation plus the bundled author script.
pub fn example_model() -> TaskModel {
    let script = AuthorScript::parse(bundled::SAVE_SCRIPT).expect("bundled script parses");
    apply_script(&derived_example(), &script, &bundled::grammar()).expect("bundled script applies")
}

pub fn apply_script(model: &TaskModel, script: &AuthorScript, grammar: &Grammar) -> Result<TaskModel, ScriptError> {
    script.apply(model, grammar).map(|(m, _)| m)
}
