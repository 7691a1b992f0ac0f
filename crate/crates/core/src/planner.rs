//! Document planning: goal action + decomposition -> tree of discourse acts.
//!
//! The plan is language-neutral; it holds node references and act kinds only.
//! Shape:
//!
//! ```text
//! document
//!   title <goal>
//!   step-sequence <plan>
//!     step <action>                 preconditions first, then sub-actions
//!       alternative-group <plan>    when the action has a choice plan
//!         step <method> ...
//!       result <effect> ...
//!   warning-note <action> ...
//!   note <action> ...               cancellations
//! ```

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::NodeId;
use crate::kb::{Decomposition, RelationKind, TaskModel, Violation};

pub const DOCPLAN_HEADER: &str = "docplan";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActKind {
    Document,
    Title,
    StepSequence,
    Step,
    AlternativeGroup,
    Result,
    Note,
    WarningNote,
}

impl ActKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActKind::Document => "document",
            ActKind::Title => "title",
            ActKind::StepSequence => "step-sequence",
            ActKind::Step => "step",
            ActKind::AlternativeGroup => "alternative-group",
            ActKind::Result => "result",
            ActKind::Note => "note",
            ActKind::WarningNote => "warning-note",
        }
    }
}

impl fmt::Display for ActKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscourseAct {
    pub kind: ActKind,
    /// Node the act is about. Only the document root has none.
    pub source: Option<NodeId>,
    /// For notes: the steps of the method achieving the note's action.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub via: Vec<NodeId>,
    /// For notes with a method: whether `via` is a sequence or a choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Decomposition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<DiscourseAct>,
}

impl DiscourseAct {
    pub fn new(kind: ActKind, source: impl Into<NodeId>) -> Self {
        Self {
            kind,
            source: Some(source.into()),
            via: Vec::new(),
            mode: None,
            children: Vec::new(),
        }
    }

    pub fn source_str(&self) -> &str {
        self.source.as_ref().map_or("", NodeId::as_str)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn child(&self, kind: ActKind) -> Option<&DiscourseAct> {
        self.children.iter().find(|c| c.kind == kind)
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&DiscourseAct> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        let _ = write!(out, "{:indent$}{}", "", self.kind, indent = depth * 2);
        if let Some(src) = &self.source {
            let _ = write!(out, " {src}");
        }
        if !self.via.is_empty() {
            let via: Vec<&str> = self.via.iter().map(NodeId::as_str).collect();
            let _ = write!(out, " via={}", via.join(","));
        }
        if let Some(mode) = self.mode {
            let _ = write!(out, " mode={}", mode.as_str());
        }
        out.push('\n');
        for c in &self.children {
            c.write_text(depth + 1, out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocPlan {
    pub root: DiscourseAct,
}

impl DocPlan {
    pub fn title(&self) -> Option<&DiscourseAct> {
        self.root.child(ActKind::Title)
    }

    pub fn steps(&self) -> &[DiscourseAct] {
        self.root
            .child(ActKind::StepSequence)
            .map_or(&[], |s| s.children.as_slice())
    }

    pub fn notes(&self) -> impl Iterator<Item = &DiscourseAct> {
        self.root
            .children
            .iter()
            .filter(|c| matches!(c.kind, ActKind::Note | ActKind::WarningNote))
    }

    /// Indented, versioned text form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{DOCPLAN_HEADER} 1\n");
        self.root.write_text(0, &mut out);
        out
    }

    /// Every node id referenced anywhere in the plan.
    pub fn referenced_ids(&self) -> Vec<&NodeId> {
        self.root
            .walk()
            .into_iter()
            .flat_map(|a| a.source.iter().chain(a.via.iter()))
            .collect()
    }

    /// Structural invariants of a well-formed plan.
    pub fn check(&self) -> Result<(), String> {
        let root = &self.root;
        if root.kind != ActKind::Document || root.source.is_some() {
            return Err("root must be an unsourced document act".into());
        }
        match root.children.as_slice() {
            [t, s, rest @ ..] if t.kind == ActKind::Title && s.kind == ActKind::StepSequence => {
                if let Some(bad) = rest
                    .iter()
                    .find(|c| !matches!(c.kind, ActKind::Note | ActKind::WarningNote))
                {
                    return Err(format!("{} after the step sequence", bad.kind));
                }
                if !t.is_leaf() {
                    return Err("title has children".into());
                }
                for step in &s.children {
                    check_step(step, true)?;
                }
            }
            _ => return Err("document must start with title and step-sequence".into()),
        }
        for act in root.walk().into_iter().skip(1) {
            if act.source.is_none() {
                return Err(format!("{} act without source", act.kind));
            }
        }
        Ok(())
    }
}

fn check_step(step: &DiscourseAct, top: bool) -> Result<(), String> {
    if step.kind != ActKind::Step {
        return Err(format!("{} inside step-sequence", step.kind));
    }
    let mut seen_result = false;
    for (i, c) in step.children.iter().enumerate() {
        match c.kind {
            ActKind::AlternativeGroup if top && i == 0 => {
                if c.children.len() < 2 {
                    return Err("alternative-group with fewer than two alternatives".into());
                }
                for alt in &c.children {
                    if alt.kind != ActKind::Step || !alt.is_leaf() {
                        return Err("alternatives must be leaf steps".into());
                    }
                }
            }
            ActKind::Result if c.is_leaf() => seen_result = true,
            other => return Err(format!("{other} misplaced in step")),
        }
        if seen_result && c.kind != ActKind::Result {
            return Err("content after result".into());
        }
    }
    Ok(())
}

impl fmt::Display for DocPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("unknown-node: `{0}`")]
    UnknownNode(NodeId),
    #[error("not-an-action: `{0}` is a plan")]
    NotAnAction(NodeId),
    #[error("no-plan-for-goal: no plan achieves `{0}`")]
    NoPlanForGoal(NodeId),
    #[error("unfilled-slot: `{0}` still has an open slot")]
    UnfilledSlot(NodeId),
    #[error("invalid-model: {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
}

impl PlanError {
    pub fn code(&self) -> &'static str {
        match self {
            PlanError::UnknownNode(_) => "unknown-node",
            PlanError::NotAnAction(_) => "not-an-action",
            PlanError::NoPlanForGoal(_) => "no-plan-for-goal",
            PlanError::UnfilledSlot(_) => "unfilled-slot",
            PlanError::Invalid(_) => "invalid-model",
        }
    }
}

/// Output of [`plan_fragment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub plan: DocPlan,
    pub diagnostics: Vec<String>,
}

/// Plans the instructions for achieving `goal`. The model must validate.
pub fn plan_document(model: &TaskModel, goal: &str) -> Result<DocPlan, PlanError> {
    check_goal(model, goal)?;
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(PlanError::Invalid(violations));
    }
    if model.achiever(goal).is_none() {
        return Err(PlanError::NoPlanForGoal(goal.into()));
    }
    build(model, goal)
}

/// Plans any portion of the procedure rooted at `action`; an action without
/// a plan yields a title-only document and a diagnostic.
pub fn plan_fragment(model: &TaskModel, action: &str) -> Result<Fragment, PlanError> {
    check_goal(model, action)?;
    let mut diagnostics = Vec::new();
    if model.achiever(action).is_none() {
        diagnostics.push(format!("no plan achieves `{action}`; only a title was planned"));
    }
    Ok(Fragment {
        plan: build(model, action)?,
        diagnostics,
    })
}

fn check_goal(model: &TaskModel, goal: &str) -> Result<(), PlanError> {
    if model.action(goal).is_some() {
        Ok(())
    } else if model.plan(goal).is_some() {
        Err(PlanError::NotAnAction(goal.into()))
    } else {
        Err(PlanError::UnknownNode(goal.into()))
    }
}

fn build(model: &TaskModel, goal: &str) -> Result<DocPlan, PlanError> {
    let mut root = DiscourseAct {
        kind: ActKind::Document,
        source: None,
        via: Vec::new(),
        mode: None,
        children: vec![DiscourseAct::new(ActKind::Title, goal)],
    };
    let Some(plan) = model.achiever(goal) else {
        // The empty sequence of a title-only plan points back at the goal.
        root.children.push(DiscourseAct::new(ActKind::StepSequence, goal));
        let plan = DocPlan { root };
        check_filled(model, &plan)?;
        return Ok(plan);
    };
    let pid = plan.id.as_str();
    let mut sequence = DiscourseAct::new(ActKind::StepSequence, pid);
    for action in model.ordered_targets(pid, RelationKind::Precondition) {
        sequence.children.push(plan_step(model, action.as_str()));
    }
    if plan.decomposition == Decomposition::Choice {
        // Methods of a choice goal are alternatives of one step.
        sequence.children.push(plan_step(model, goal));
    } else {
        for action in model.ordered_targets(pid, RelationKind::SubAction) {
            sequence.children.push(plan_step(model, action.as_str()));
        }
    }
    root.children.push(sequence);
    for target in sorted_targets(model, pid, RelationKind::Warning) {
        root.children
            .push(DiscourseAct::new(ActKind::WarningNote, target.clone()));
    }
    for target in sorted_targets(model, pid, RelationKind::Cancellation) {
        root.children.push(plan_note(model, target));
    }
    let plan = DocPlan { root };
    check_filled(model, &plan)?;
    Ok(plan)
}

fn sorted_targets<'a>(model: &'a TaskModel, from: &'a str, kind: RelationKind) -> Vec<&'a NodeId> {
    let mut out: Vec<_> = model.edges_from(from, kind).map(|e| &e.to).collect();
    out.sort();
    out
}

fn plan_step(model: &TaskModel, action: &str) -> DiscourseAct {
    let mut step = DiscourseAct::new(ActKind::Step, action);
    if let Some(method) = model.achiever(action) {
        if method.decomposition == Decomposition::Choice {
            let mid = method.id.as_str();
            let mut group = DiscourseAct::new(ActKind::AlternativeGroup, mid);
            for alt in model.ordered_targets(mid, RelationKind::SubAction) {
                group.children.push(DiscourseAct::new(ActKind::Step, alt.clone()));
            }
            step.children.push(group);
        }
    }
    for effect in sorted_targets(model, action, RelationKind::SideEffect) {
        step.children.push(DiscourseAct::new(ActKind::Result, effect.clone()));
    }
    step
}

fn plan_note(model: &TaskModel, target: &NodeId) -> DiscourseAct {
    let mut note = DiscourseAct::new(ActKind::Note, target.clone());
    if let Some(method) = model.achiever(target.as_str()) {
        let mid = method.id.as_str();
        note.via = model
            .ordered_targets(mid, RelationKind::Precondition)
            .into_iter()
            .chain(model.ordered_targets(mid, RelationKind::SubAction))
            .cloned()
            .collect();
        note.mode = Some(method.decomposition);
    }
    note
}

fn check_filled(model: &TaskModel, plan: &DocPlan) -> Result<(), PlanError> {
    for id in plan.referenced_ids() {
        if let Some(action) = model.action(id.as_str()) {
            if action.complex.open_slot.is_some() {
                return Err(PlanError::UnfilledSlot(id.clone()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::example_model;

    fn ids(acts: &[DiscourseAct]) -> Vec<&str> {
        acts.iter().map(DiscourseAct::source_str).collect()
    }

    #[test]
    fn example_plan() {
        let model = example_model();
        let plan = plan_document(&model, "save-a-document").unwrap();
        plan.check().unwrap();
        assert_eq!(plan.title().unwrap().source_str(), "save-a-document");
        let steps = plan.steps();
        assert_eq!(
            ids(steps),
            [
                "open-save-as",
                "type-document-name",
                "open-folder",
                "choose-save-button"
            ]
        );
        let first = &steps[0];
        let group = first.child(ActKind::AlternativeGroup).unwrap();
        assert_eq!(ids(&group.children), ["choose-save-option", "click-save-icon"]);
        assert_eq!(first.children[1].kind, ActKind::Result);
        assert_eq!(first.children[1].source_str(), "display-save-as");
        assert!(steps[1..].iter().all(DiscourseAct::is_leaf));

        let notes: Vec<_> = plan.notes().collect();
        assert_eq!(notes.len(), 1);
        assert_eq!(notes[0].kind, ActKind::Note);
        assert_eq!(notes[0].source_str(), "quit-save-as");
        assert_eq!(notes[0].via, [NodeId::from("choose-cancel-button")]);
    }

    #[test]
    fn text_form() {
        let plan = plan_document(&example_model(), "save-a-document").unwrap();
        let text = plan.to_text();
        assert!(text.starts_with("docplan 1\ndocument\n  title save-a-document\n  step-sequence save-document-plan\n"));
        assert!(text.contains("      alternative-group open-save-as-plan\n        step choose-save-option\n"));
        assert!(text.ends_with("  note quit-save-as via=choose-cancel-button mode=sequence\n"));
    }

    #[test]
    fn single_sub_action_goal() {
        let mut model = example_model();
        let plan = plan_document(&model, "quit-save-as").unwrap();
        assert_eq!(plan.root.children.len(), 2);
        assert_eq!(ids(plan.steps()), ["choose-cancel-button"]);

        let p = model.add_plan(Decomposition::Sequence, Some("p"));
        model.link(RelationKind::Goal, p.as_str(), "open-folder", None).unwrap();
        model
            .link(RelationKind::SubAction, p.as_str(), "choose-save-button", None)
            .unwrap();
        let plan = plan_document(&model, "open-folder").unwrap();
        assert_eq!(ids(plan.steps()), ["choose-save-button"]);
    }

    #[test]
    fn errors() {
        let model = example_model();
        assert_eq!(
            plan_document(&model, "open-folder"),
            Err(PlanError::NoPlanForGoal("open-folder".into()))
        );
        assert_eq!(
            plan_document(&model, "nope"),
            Err(PlanError::UnknownNode("nope".into()))
        );
        assert!(matches!(
            plan_document(&model, "save-document-plan"),
            Err(PlanError::NotAnAction(_))
        ));

        let mut broken = model.clone();
        broken.add_plan(Decomposition::Choice, Some("lonely"));
        assert!(matches!(
            plan_document(&broken, "save-a-document"),
            Err(PlanError::Invalid(_))
        ));
    }

    #[test]
    fn fragments() {
        let model = example_model();
        let whole = plan_fragment(&model, "save-a-document").unwrap();
        assert!(whole.diagnostics.is_empty());
        assert_eq!(whole.plan, plan_document(&model, "save-a-document").unwrap());

        // open-save-as is achieved by a choice plan: a single step whose
        // alternatives are the methods, followed by the effect.
        let f = plan_fragment(&model, "open-save-as").unwrap();
        f.plan.check().unwrap();
        assert_eq!(ids(f.plan.steps()), ["open-save-as"]);
        let group = f.plan.steps()[0].child(ActKind::AlternativeGroup).unwrap();
        assert_eq!(ids(&group.children), ["choose-save-option", "click-save-icon"]);
        assert_eq!(f.plan.steps()[0].children[1].source_str(), "display-save-as");

        let leaf = plan_fragment(&model, "open-folder").unwrap();
        assert_eq!(leaf.diagnostics.len(), 1);
        assert!(leaf.plan.steps().is_empty());
        leaf.plan.check().unwrap();
    }

    #[test]
    fn warnings_precede_cancellations() {
        let mut model = example_model();
        model
            .link(RelationKind::Warning, "save-document-plan", "quit-save-as", None)
            .unwrap();
        let plan = plan_document(&model, "save-a-document").unwrap();
        let kinds: Vec<_> = plan.notes().map(|n| n.kind).collect();
        assert_eq!(kinds, [ActKind::WarningNote, ActKind::Note]);
    }

    #[test]
    fn unfilled_slot_is_reported() {
        let tree = crate::uispec::parse_uispec("uispec 1\napplication \"Word\" { text-field \"Name\" }").unwrap();
        // Without a content binding the field's action keeps an open slot.
        let mut fresh = crate::bundled::base_model();
        crate::uispec::derive_instances(&tree, &crate::bundled::default_rules(), &fresh)
            .unwrap()
            .apply(&mut fresh)
            .unwrap();
        let p = fresh.add_plan(Decomposition::Sequence, Some("p"));
        let goal = fresh
            .add_action(
                crate::kb::ActionComplex::new("save", crate::kb::Actor::Reader)
                    .with_actee(crate::kb::Filler::Instance("current-document".into())),
                crate::kb::Origin::Authored,
            )
            .unwrap()
            .id;
        fresh.link(RelationKind::Goal, p.as_str(), goal.as_str(), None).unwrap();
        fresh
            .link(RelationKind::SubAction, p.as_str(), "type-name-field", None)
            .unwrap();
        assert_eq!(
            plan_document(&fresh, goal.as_str()),
            Err(PlanError::UnfilledSlot("type-name-field".into()))
        );
    }
}
