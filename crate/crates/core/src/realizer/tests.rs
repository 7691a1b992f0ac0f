use super::*;
use crate::bundled::{self, GOLDEN_EN, GOLDEN_FR};
use crate::kb::{ActionComplex, Decomposition, Origin, RelationKind};
use crate::pipeline::example_model;
use crate::planner::plan_document;

fn lex(code: &str) -> Lexicon {
    bundled::lexicon(&Language::new(code)).unwrap()
}

fn rules(code: &str) -> Box<dyn LanguageRules> {
    builtin_rules(&Language::new(code)).unwrap()
}

fn render(model: &TaskModel, goal: &str, code: &str) -> RenderedDoc {
    let plan = plan_document(model, goal).unwrap();
    realize_document(&plan, model, &lex(code), rules(code).as_ref()).unwrap()
}

#[test]
fn golden_english() {
    assert_eq!(render(&example_model(), "save-a-document", "en").text, GOLDEN_EN);
}

#[test]
fn golden_french() {
    assert_eq!(render(&example_model(), "save-a-document", "fr").text, GOLDEN_FR);
}

#[test]
fn single_sentences() {
    let model = example_model();
    let cases = [
        (ActKind::Step, "choose-save-button", "en", "Choose the Save button."),
        (
            ActKind::Step,
            "choose-save-button",
            "fr",
            "Choisir le bouton Enregistrer.",
        ),
        (
            ActKind::Result,
            "display-save-as",
            "fr",
            "Word affichera la zone de dialogue Enregistrer Sous.",
        ),
        (
            ActKind::Result,
            "display-save-as",
            "en",
            "Word displays the Save As dialog box.",
        ),
        (
            ActKind::Step,
            "click-save-icon",
            "fr",
            "Cliquer sur l'icone Enregistrer.",
        ),
        (ActKind::Title, "save-a-document", "en", "To Save a Document"),
        (ActKind::Title, "save-a-document", "fr", "Enregistrement d'un document"),
        (
            ActKind::Title,
            "open-save-as",
            "fr",
            "Ouverture de la zone de dialogue Enregistrer Sous",
        ),
    ];
    for (kind, id, code, want) in cases {
        let act = DiscourseAct::new(kind, id);
        let (text, node) = realize_sentence(&act, &model, &lex(code), rules(code).as_ref()).unwrap();
        assert_eq!((text.as_str(), node.as_str()), (want, id));
    }
}

#[test]
fn non_leaf_is_rejected() {
    let model = example_model();
    let plan = plan_document(&model, "save-a-document").unwrap();
    let err = realize_sentence(&plan.steps()[0], &model, &lex("en"), rules("en").as_ref()).unwrap_err();
    assert_eq!(err, RealizeError::NotALeaf(ActKind::Step));
}

#[test]
fn provenance_covers_each_line() {
    let doc = render(&example_model(), "save-a-document", "en");
    let acts: Vec<(&str, &str)> = doc
        .provenance
        .iter()
        .map(|s| (s.act.as_str(), s.node.as_str()))
        .collect();
    assert_eq!(
        acts,
        [
            ("title", "save-a-document"),
            ("alternative", "choose-save-option"),
            ("alternative", "click-save-icon"),
            ("result", "display-save-as"),
            ("step", "type-document-name"),
            ("step", "open-folder"),
            ("step", "choose-save-button"),
            ("note", "quit-save-as"),
        ]
    );
    // Spans are in order, disjoint, and each is exactly one line's sentence.
    let lines: Vec<&str> = doc.text.lines().collect();
    let mut last_end = 0;
    for span in &doc.provenance {
        assert!(span.start >= last_end && span.end > span.start);
        last_end = span.end;
        let text = doc.span_text(span);
        assert!(lines.iter().any(|l| l.ends_with(&text)), "{text}");
    }
    assert_eq!(
        doc.span_text(&doc.provenance[3]),
        "Word displays the Save As dialog box."
    );
    let word_offset = doc.text.chars().position(|c| c == 'W').unwrap();
    assert_eq!(doc.node_at(word_offset).unwrap().as_str(), "display-save-as");
    assert_eq!(doc.node_at(0).unwrap().as_str(), "save-a-document");
}

// Offsets count characters: the French text has accented letters and the
// bullet before the note.
#[test]
fn provenance_offsets_are_chars() {
    let doc = render(&example_model(), "save-a-document", "fr");
    let note = doc.provenance.last().unwrap();
    assert_eq!(note.end, doc.text.chars().count() - 1);
    assert!(doc.span_text(note).starts_with("Vous pouvez quitter"));
    let json: serde_json::Value = serde_json::from_str(&doc.sidecar_json()).unwrap();
    assert_eq!(json["language"], "fr");
    assert_eq!(json["spans"].as_array().unwrap().len(), 8);
}

#[test]
fn title_only_document() {
    let model = example_model();
    let frag = crate::planner::plan_fragment(&model, "open-folder").unwrap();
    let doc = realize_document(&frag.plan, &model, &lex("en"), &English).unwrap();
    assert_eq!(doc.text, "To Open the Folder of the Document\n");
    assert_eq!(doc.provenance.len(), 1);
}

#[test]
fn missing_lexeme() {
    let model = example_model();
    let plan = plan_document(&model, "save-a-document").unwrap();
    let stripped = Lexicon::parse(
        &bundled::EN_LEXICON
            .lines()
            .filter(|l| !l.starts_with("verb click"))
            .collect::<Vec<_>>()
            .join("\n"),
    )
    .unwrap();
    let err = realize_document(&plan, &model, &stripped, &English).unwrap_err();
    assert_eq!(
        err,
        RealizeError::MissingLexeme {
            concept: "click".into(),
            language: Language::new("en"),
            form: "verb".into()
        }
    );

    let no_gerund = Lexicon::parse(&bundled::EN_LEXICON.replace(" gerund=\"choosing\"", "")).unwrap();
    let err = realize_document(&plan, &model, &no_gerund, &English).unwrap_err();
    assert_eq!(err.code(), "missing-lexeme");
    assert!(err.to_string().contains("gerund"));
}

#[test]
fn language_mismatch() {
    let model = example_model();
    let plan = plan_document(&model, "save-a-document").unwrap();
    let err = realize_document(&plan, &model, &lex("fr"), &English).unwrap_err();
    assert_eq!(err.code(), "language-mismatch");
}

#[test]
fn warnings_and_multi_step_notes() {
    let mut model = example_model();
    model
        .link(RelationKind::Warning, "save-document-plan", "display-save-as", None)
        .unwrap();
    let p = model.add_plan(Decomposition::Choice, Some("open-folder-plan"));
    model.link(RelationKind::Goal, p.as_str(), "open-folder", None).unwrap();
    model
        .link(RelationKind::SubAction, p.as_str(), "choose-save-button", None)
        .unwrap();
    model
        .link(RelationKind::SubAction, p.as_str(), "click-save-icon", None)
        .unwrap();
    let extra = model
        .add_action(
            ActionComplex::new("quit", crate::kb::Actor::Reader)
                .with_actee(crate::kb::Filler::Instance("save-as".into())),
            Origin::Authored,
        )
        .unwrap();
    assert!(extra.duplicate);

    let en = render(&model, "save-a-document", "en");
    let fr = render(&model, "save-a-document", "fr");
    assert!(en
        .text
        .contains("\n• Warning: Word displays the Save As dialog box.\n• You can quit"));
    assert!(fr
        .text
        .contains("\n• Attention : Word affichera la zone de dialogue Enregistrer Sous.\n"));
    // Step 3 now has alternatives of its own.
    assert!(en
        .text
        .contains("3. Choose the Save button.\n   -OR-\n   Click on the Save icon.\n4. "));

    let acts = |d: &RenderedDoc| d.provenance.iter().map(|s| s.act.clone()).collect::<Vec<_>>();
    assert_eq!(acts(&en), acts(&fr));
}
