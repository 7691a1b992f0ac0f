use std::path::PathBuf;

use taskdraft_core::bundled;
use taskdraft_core::script::{apply_command, AuthorScript, Command, CommandError, Outcome};
use taskdraft_core::{Grammar, Lexicon, TaskModel};

/// The one model a server instance edits, its revision counter and the
/// journal of successful mutations.
#[derive(Debug, Clone)]
pub struct Session {
    initial: TaskModel,
    model: TaskModel,
    revision: u64,
    journal: AuthorScript,
    pub grammar: Grammar,
    pub lexicons: Vec<Lexicon>,
    /// Where `POST /save` writes the model.
    pub save_path: Option<PathBuf>,
}

impl Session {
    pub fn new(model: TaskModel) -> Self {
        Self {
            initial: model.clone(),
            model,
            revision: 0,
            journal: AuthorScript::default(),
            grammar: bundled::grammar(),
            lexicons: Vec::new(),
            save_path: None,
        }
    }

    pub fn with_lexicons(mut self, lexicons: Vec<Lexicon>) -> Self {
        self.lexicons = lexicons;
        self
    }

    pub fn with_save_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.save_path = Some(path.into());
        self
    }

    pub fn model(&self) -> &TaskModel {
        &self.model
    }

    pub fn initial(&self) -> &TaskModel {
        &self.initial
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Successful mutations so far, as a replayable script.
    pub fn journal(&self) -> &AuthorScript {
        &self.journal
    }

    /// Applies a command. The revision moves only when the model changed;
    /// re-adding an existing action changes nothing.
    pub fn mutate(&mut self, command: Command) -> Result<Outcome, CommandError> {
        let mut work = self.model.clone();
        let outcome = apply_command(&mut work, &self.grammar, &command)?;
        if !matches!(&outcome, Outcome::Action(a) if a.duplicate) {
            self.model = work;
            self.revision += 1;
            self.journal.push(command);
        }
        Ok(outcome)
    }
}
