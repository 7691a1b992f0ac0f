use proptest::prelude::*;
use taskdraft_core::bundled::{self, GOLDEN_EN, GOLDEN_FR};
use taskdraft_core::generate::{random_model, seeded};
use taskdraft_core::pipeline::{draft, example_model};
use taskdraft_core::realizer::{RenderedDoc, Span};
use taskdraft_core::Language;

fn langs() -> Vec<Language> {
    vec![Language::new("en"), Language::new("fr")]
}

fn acts(doc: &RenderedDoc) -> Vec<(String, String)> {
    doc.provenance
        .iter()
        .map(|s| (s.act.clone(), s.node.to_string()))
        .collect()
}

/// Spans are ordered and disjoint, and every non-blank line except
/// separators holds exactly one span whose text ends the line.
fn check_provenance(doc: &RenderedDoc, separator: &str) -> Result<(), String> {
    let mut spans = doc.provenance.iter().peekable();
    let mut offset = 0;
    let mut last_end = 0;
    for line in doc.text.split_inclusive('\n') {
        let body = line.trim_end_matches('\n');
        let len = body.chars().count();
        let on_line: Vec<&Span> = std::iter::from_fn(|| spans.next_if(|s| s.start < offset + len + 1)).collect();
        if body.trim().is_empty() || body.trim() == separator {
            if !on_line.is_empty() {
                return Err(format!("span on `{body}`"));
            }
        } else {
            let [span] = on_line.as_slice() else {
                return Err(format!("{} spans on `{body}`", on_line.len()));
            };
            if span.start < last_end || span.end != offset + len {
                return Err(format!("bad span {span:?} on `{body}`"));
            }
            last_end = span.end;
        }
        offset += line.chars().count();
    }
    match spans.next() {
        Some(extra) => Err(format!("span past the end: {extra:?}")),
        None => Ok(()),
    }
}

#[test]
fn goldens_and_stability() {
    let m = example_model();
    let a = draft(&m, "save-a-document", &langs(), &[]).unwrap();
    let b = draft(&m, "save-a-document", &langs(), &[]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[0].text, GOLDEN_EN);
    assert_eq!(a[1].text, GOLDEN_FR);
    check_provenance(&a[0], "-OR-").unwrap();
    check_provenance(&a[1], "-OU BIEN-").unwrap();
}

// The Save As dialog is named the same way in the result line and the note.
#[test]
fn referential_consistency() {
    let docs = draft(&example_model(), "save-a-document", &langs(), &[]).unwrap();
    assert_eq!(docs[0].text.matches("the Save As dialog box").count(), 2);
    assert_eq!(docs[1].text.matches("la zone de dialogue Enregistrer Sous").count(), 2);
}

#[test]
fn custom_lexicon_overrides_bundled() {
    let m = example_model();
    let accented = bundled::FR_LEXICON.replace("singular=\"icone\"", "singular=\"icône\"");
    let lex = taskdraft_core::Lexicon::parse(&accented).unwrap();
    let docs = draft(&m, "save-a-document", &[Language::new("fr")], &[lex]).unwrap();
    assert!(docs[0].text.contains("Cliquer sur l'icône Enregistrer."));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn en_fr_parallel(seed in any::<u64>()) {
        let g = random_model(&mut seeded(seed));
        let docs = draft(&g.model, g.goal.as_str(), &langs(), &[]).unwrap();
        prop_assert_eq!(acts(&docs[0]), acts(&docs[1]));
        prop_assert!(check_provenance(&docs[0], "-OR-").is_ok(), "{:?}\n{}", check_provenance(&docs[0], "-OR-"), docs[0].text);
        prop_assert!(check_provenance(&docs[1], "-OU BIEN-").is_ok(), "{:?}\n{}", check_provenance(&docs[1], "-OU BIEN-"), docs[1].text);
        for d in &docs {
            prop_assert!(d.text.ends_with('\n'));
            for s in &d.provenance {
                let t = d.span_text(s);
                prop_assert!(s.act == "title" || t.ends_with('.'), "{}", t);
                prop_assert!(t.chars().next().is_some_and(char::is_uppercase), "{}", t);
            }
        }
    }
}
