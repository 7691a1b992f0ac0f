//! Author scripts: the authoring operations of the editor as replayable text.
//!
//! ```text
//! taskdraft-script 1
//! action reader save current document
//! plan save-document-plan sequence "Save-Document-Plan"
//! link goal save-document-plan save-a-document
//! link sub-action save-document-plan open-folder 2
//! ```
//!
//! `action` takes a ground CNL sentence. `plan` takes the id the plan must
//! receive, its mode and an optional display label. `link` takes a relation
//! kind, the two endpoints and, for ordered kinds, an optional position.
//! A script applies all-or-nothing.

use std::fmt;

use thiserror::Error;

use crate::cnl::{Cnl, CnlError, Grammar};
use crate::ids::NodeId;
use crate::kb::{AddedAction, Decomposition, KbError, Origin, RelationEdge, RelationKind, TaskModel};
use crate::record::{quote, tokenize, Pairs};

pub const SCRIPT_HEADER: &str = "taskdraft-script";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Action {
        sentence: String,
    },
    Plan {
        id: String,
        mode: Decomposition,
        label: Option<String>,
    },
    Link {
        kind: RelationKind,
        from: String,
        to: String,
        order: Option<u32>,
    },
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Action { sentence } => write!(f, "action {sentence}"),
            Command::Plan { id, mode, label } => {
                write!(f, "plan {id} {}", mode.as_str())?;
                match label {
                    Some(label) => write!(f, " {}", quote(label)),
                    None => Ok(()),
                }
            }
            Command::Link { kind, from, to, order } => {
                write!(f, "link {kind} {from} {to}")?;
                match order {
                    Some(n) => write!(f, " {n}"),
                    None => Ok(()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error(transparent)]
    Cnl(#[from] CnlError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("id-clash: plan would be named `{got}`, not `{wanted}`; the id is taken")]
    PlanIdTaken { wanted: String, got: NodeId },
}

impl CommandError {
    pub fn code(&self) -> &'static str {
        match self {
            CommandError::Cnl(e) => e.code(),
            CommandError::Kb(e) => e.code(),
            CommandError::PlanIdTaken { .. } => "id-clash",
        }
    }
}

/// A failed command; `index` counts commands from 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("command {index} (line {line}, `{command}`): {error}")]
pub struct ScriptError {
    pub index: usize,
    pub line: usize,
    pub command: String,
    pub error: CommandError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Action(AddedAction),
    Plan(NodeId),
    Link(RelationEdge),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuthorScript {
    /// Commands with the line they came from (0 for constructed ones).
    pub commands: Vec<(usize, Command)>,
}

impl AuthorScript {
    pub fn parse(text: &str) -> Result<Self, ScriptParseError> {
        let mut commands = Vec::new();
        let mut header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| ScriptParseError { line, message };
            let tokens = tokenize(raw).map_err(err)?;
            if tokens.is_empty() {
                continue;
            }
            let (positional, pairs) = Pairs::from_tokens(tokens).map_err(err)?;
            pairs.finish().map_err(err)?;
            let words: Vec<&str> = positional.iter().filter_map(|t| t.text()).collect();
            if !header {
                if words != [SCRIPT_HEADER, "1"] {
                    return Err(err(format!("expected `{SCRIPT_HEADER} 1` header")));
                }
                header = true;
                continue;
            }
            let command =
                match words.as_slice() {
                    ["action", sentence @ ..] if !sentence.is_empty() => Command::Action {
                        sentence: sentence.join(" "),
                    },
                    ["plan", id, mode, rest @ ..] if rest.len() <= 1 => Command::Plan {
                        id: id.to_string(),
                        mode: Decomposition::parse(mode).ok_or_else(|| err(format!("unknown plan mode `{mode}`")))?,
                        label: rest.first().map(|s| s.to_string()),
                    },
                    ["link", kind, from, to, rest @ ..] if rest.len() <= 1 => Command::Link {
                        kind: RelationKind::parse(kind).ok_or_else(|| err(format!("unknown relation `{kind}`")))?,
                        from: from.to_string(),
                        to: to.to_string(),
                        order: match rest.first() {
                            Some(n) => Some(n.parse().map_err(|_| err(format!("bad order `{n}`")))?),
                            None => None,
                        },
                    },
                    _ => return Err(err(
                        "expected `action <sentence>`, `plan <id> <mode> [label]` or `link <kind> <from> <to> [order]`"
                            .into(),
                    )),
                };
            commands.push((line, command));
        }
        if !header {
            return Err(ScriptParseError {
                line: 1,
                message: format!("missing `{SCRIPT_HEADER} 1` header"),
            });
        }
        Ok(AuthorScript { commands })
    }

    pub fn push(&mut self, command: Command) {
        self.commands.push((0, command));
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{SCRIPT_HEADER} 1\n");
        for (_, c) in &self.commands {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    /// Applies every command to a copy of `model` and returns the copy;
    /// `model` itself is never touched.
    pub fn apply(&self, model: &TaskModel, grammar: &Grammar) -> Result<(TaskModel, Vec<Outcome>), ScriptError> {
        let mut work = model.clone();
        let mut outcomes = Vec::with_capacity(self.commands.len());
        for (i, (line, command)) in self.commands.iter().enumerate() {
            let outcome = apply_command(&mut work, grammar, command).map_err(|error| ScriptError {
                index: i + 1,
                line: *line,
                command: command.to_string(),
                error,
            })?;
            outcomes.push(outcome);
        }
        Ok((work, outcomes))
    }
}

/// Applies one command in place. On error the model is unchanged.
pub fn apply_command(model: &mut TaskModel, grammar: &Grammar, command: &Command) -> Result<Outcome, CommandError> {
    match command {
        Command::Action { sentence } => {
            let complex = Cnl::new(grammar, model).parse(sentence)?;
            Ok(Outcome::Action(model.add_action(complex, Origin::Authored)?))
        }
        Command::Plan { id, mode, label } => {
            let got = NodeId::new(crate::ids::unique_slug(&crate::ids::slugify(id), |s| model.id_taken(s)));
            if got.as_str() != id {
                return Err(CommandError::PlanIdTaken {
                    wanted: id.clone(),
                    got,
                });
            }
            let created = model.add_plan(*mode, Some(id));
            model.set_plan_label(created.as_str(), label.clone())?;
            Ok(Outcome::Plan(created))
        }
        Command::Link { kind, from, to, order } => Ok(Outcome::Link(model.link(*kind, from, to, *order)?)),
    }
}
