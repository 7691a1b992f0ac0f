//! Declarative UI specifications and derivation of interface objects and
//! primitive interface actions from them.

mod derive;
mod parse;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use derive::{derive_instances, Binding, Derivation, DerivationRule, DeriveError, RuleError, RuleTable};
pub use parse::{parse_uispec, UISPEC_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidgetKind {
    Application,
    Window,
    Dialog,
    Menu,
    MenuItem,
    Button,
    IconButton,
    TextField,
    List,
}

impl WidgetKind {
    pub const ALL: [WidgetKind; 9] = [
        WidgetKind::Application,
        WidgetKind::Window,
        WidgetKind::Dialog,
        WidgetKind::Menu,
        WidgetKind::MenuItem,
        WidgetKind::Button,
        WidgetKind::IconButton,
        WidgetKind::TextField,
        WidgetKind::List,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WidgetKind::Application => "application",
            WidgetKind::Window => "window",
            WidgetKind::Dialog => "dialog",
            WidgetKind::Menu => "menu",
            WidgetKind::MenuItem => "menu-item",
            WidgetKind::Button => "button",
            WidgetKind::IconButton => "icon-button",
            WidgetKind::TextField => "text-field",
            WidgetKind::List => "list",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        WidgetKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Concept the widget's object instance belongs to.
    pub fn concept(self) -> &'static str {
        match self {
            WidgetKind::Application => "application-program",
            WidgetKind::Window => "window",
            WidgetKind::Dialog => "dialog-box",
            WidgetKind::Menu => "menu",
            WidgetKind::MenuItem => "menu-option",
            WidgetKind::Button => "button",
            WidgetKind::IconButton => "icon",
            WidgetKind::TextField => "text-field",
            WidgetKind::List => "list",
        }
    }

    /// Suffix appended to the label slug for generated ids.
    fn id_suffix(self) -> Option<&'static str> {
        match self {
            WidgetKind::Application | WidgetKind::Window | WidgetKind::Dialog => None,
            WidgetKind::Menu => Some("menu"),
            WidgetKind::MenuItem => Some("option"),
            WidgetKind::Button => Some("button"),
            WidgetKind::IconButton => Some("icon"),
            WidgetKind::TextField => Some("field"),
            WidgetKind::List => Some("list"),
        }
    }

    pub fn may_contain(self, child: WidgetKind) -> bool {
        use WidgetKind::*;
        match child {
            Application => false,
            Window | Dialog => self == Application,
            Menu | Button | IconButton | TextField | List => matches!(self, Window | Dialog | Application),
            MenuItem => self == Menu,
        }
    }
}

impl fmt::Display for WidgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WidgetSpec {
    pub id: String,
    pub kind: WidgetKind,
    pub label: String,
    /// Concept or instance id of what the widget holds (text fields).
    pub content: Option<String>,
    pub children: Vec<WidgetSpec>,
}

impl WidgetSpec {
    /// Pre-order walk yielding each widget with its parent.
    pub fn walk(&self) -> Vec<(Option<&WidgetSpec>, &WidgetSpec)> {
        fn go<'a>(
            parent: Option<&'a WidgetSpec>,
            w: &'a WidgetSpec,
            out: &mut Vec<(Option<&'a WidgetSpec>, &'a WidgetSpec)>,
        ) {
            out.push((parent, w));
            for c in &w.children {
                go(Some(w), c, out);
            }
        }
        let mut out = Vec::new();
        go(None, self, &mut out);
        out
    }

    /// Checks nesting and id uniqueness.
    pub fn check(&self) -> Result<(), UispecError> {
        if self.kind != WidgetKind::Application {
            return Err(UispecError::IllegalNesting {
                parent: None,
                child: self.kind,
                line: 0,
            });
        }
        let mut ids = std::collections::BTreeSet::new();
        for (parent, w) in self.walk() {
            if let Some(p) = parent {
                if !p.kind.may_contain(w.kind) {
                    return Err(UispecError::IllegalNesting {
                        parent: Some(p.kind),
                        child: w.kind,
                        line: 0,
                    });
                }
            }
            if !ids.insert(w.id.as_str()) {
                return Err(UispecError::DuplicateId(w.id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UispecError {
    #[error("parse-error: line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("illegal-nesting: {child} under {}", .parent.map_or("the top level", WidgetKind::as_str))]
    IllegalNesting {
        parent: Option<WidgetKind>,
        child: WidgetKind,
        line: usize,
    },
    #[error("duplicate-id: `{0}`")]
    DuplicateId(String),
}

/// Source of widget trees. The native `.uispec` reader implements it; other
/// UI-builder formats can plug in by producing the same tree.
pub trait UiImporter {
    fn import(&self, text: &str) -> Result<WidgetSpec, UispecError>;
}

/// Reader for the native `.uispec` block grammar.
#[derive(Debug, Default, Clone, Copy)]
pub struct UispecImporter;

impl UiImporter for UispecImporter {
    fn import(&self, text: &str) -> Result<WidgetSpec, UispecError> {
        parse_uispec(text)
    }
}
