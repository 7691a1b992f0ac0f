//! Random task models for property tests and benchmarks.
//!
//! Randomness comes from the caller as a `pick(n)` function returning a value
//! in `0..n`, so any seeded generator (or a proptest strategy) can drive it.
//! Models are built the way an author would: a random widget tree is
//! ingested with the default rules, a few domain and system actions are
//! added, and a plan tree is grown over distinct actions. Every generated
//! model validates.

use crate::bundled;
use crate::ids::NodeId;
use crate::kb::{ActionComplex, Actor, Decomposition, Filler, Origin, RelationKind, TaskModel};
use crate::pipeline::ingest;
use crate::uispec::WidgetKind;

pub type Pick<'a> = &'a mut dyn FnMut(usize) -> usize;

const LABELS: &[&str] = &[
    "Save", "Open", "Print", "Close", "Export", "Format", "Insert", "Options", "Help", "Find", "Replace",
];
const APPS: &[&str] = &["Word", "Writer", "Editor", "Pad"];

#[derive(Debug, Clone)]
pub struct Generated {
    pub uispec: String,
    pub model: TaskModel,
    pub goal: NodeId,
}

fn choose<'s>(pick: Pick<'_>, items: &[&'s str]) -> &'s str {
    items[pick(items.len())]
}

/// Up to `n` distinct items; identical siblings would get identical ids.
fn distinct<'s>(pick: Pick<'_>, items: &[&'s str], n: usize) -> Vec<&'s str> {
    let mut left = items.to_vec();
    (0..n.min(items.len())).map(|_| left.remove(pick(left.len()))).collect()
}

/// A random specification using every widget kind the default rules cover.
pub fn random_uispec(pick: Pick<'_>) -> String {
    let mut out = format!("uispec 1\napplication \"{}\" {{\n", choose(pick, APPS));
    let n = 1 + pick(2);
    for menu in distinct(pick, &["File", "Edit", "View", "Tools"], n) {
        out.push_str(&format!("  menu \"{menu}\" {{\n"));
        let n = 1 + pick(3);
        for item in distinct(pick, LABELS, n) {
            out.push_str(&format!("    menu-item \"{item}\"\n"));
        }
        out.push_str("  }\n");
    }
    let n = pick(3);
    for icon in distinct(pick, LABELS, n) {
        out.push_str(&format!("  icon-button \"{icon}\"\n"));
    }
    let n = 1 + pick(2);
    for window in distinct(pick, LABELS, n) {
        let kind = if pick(3) == 0 {
            WidgetKind::Window
        } else {
            WidgetKind::Dialog
        };
        out.push_str(&format!("  {} \"{window} As\" {{\n", kind.as_str()));
        let n = pick(2);
        for field in distinct(pick, LABELS, n) {
            out.push_str(&format!("    text-field \"{field} Name\" content=document-name\n"));
        }
        let n = 1 + pick(3);
        for button in distinct(pick, &["OK", "Cancel", "Apply", "Save", "Close"], n) {
            out.push_str(&format!("    button \"{button}\"\n"));
        }
        if pick(2) == 0 {
            out.push_str("    list \"Folder\"\n");
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

struct Grower<'p, 'q> {
    pick: &'p mut (dyn FnMut(usize) -> usize + 'q),
    model: TaskModel,
    pool: Vec<NodeId>,
    effects: Vec<NodeId>,
    plans: usize,
}

impl Grower<'_, '_> {
    fn take(&mut self) -> Option<NodeId> {
        if self.pool.is_empty() {
            None
        } else {
            let i = (self.pick)(self.pool.len());
            Some(self.pool.remove(i))
        }
    }

    fn new_plan(&mut self, mode: Decomposition) -> NodeId {
        self.plans += 1;
        self.model.add_plan(mode, Some(&format!("plan-{}", self.plans)))
    }

    /// Grows a plan achieving `goal`; false when the pool is exhausted.
    fn grow(&mut self, goal: &NodeId, depth: usize) -> bool {
        let choice = self.pool.len() >= 2 && (self.pick)(3) == 0;
        let (mode, count) = if choice {
            (Decomposition::Choice, 2 + (self.pick)(2))
        } else {
            (Decomposition::Sequence, 1 + (self.pick)(3))
        };
        if self.pool.is_empty() {
            return false;
        }
        let plan = self.new_plan(mode);
        let p = plan.as_str();
        self.model
            .link(RelationKind::Goal, p, goal.as_str(), None)
            .expect("fresh goal");
        let mut children = Vec::new();
        if mode == Decomposition::Sequence && self.pool.len() > 1 && (self.pick)(3) == 0 {
            if let Some(pre) = self.take() {
                self.model
                    .link(RelationKind::Precondition, p, pre.as_str(), Some(1))
                    .expect("fresh precondition");
                children.push(pre);
            }
        }
        let mut subs = 0;
        while subs < count {
            let Some(sub) = self.take() else { break };
            self.model
                .link(RelationKind::SubAction, p, sub.as_str(), None)
                .expect("fresh sub-action");
            children.push(sub);
            subs += 1;
        }
        if subs == 0 || (mode == Decomposition::Choice && subs < 2) {
            unreachable!("pool size was checked");
        }
        for child in children {
            if depth < 2 && (self.pick)(4) == 0 {
                self.grow(&child, depth + 1);
            }
            if !self.effects.is_empty() && (self.pick)(4) == 0 {
                let e = self.effects[(self.pick)(self.effects.len())].clone();
                let _ = self
                    .model
                    .link(RelationKind::SideEffect, child.as_str(), e.as_str(), None);
            }
        }
        if depth == 0 {
            for kind in [RelationKind::Cancellation, RelationKind::Warning] {
                if (self.pick)(2) == 0 {
                    if let Some(target) = self.take() {
                        self.model
                            .link(kind, p, target.as_str(), None)
                            .expect("fresh note edge");
                        if (self.pick)(2) == 0 {
                            self.grow(&target, 1);
                        }
                    }
                }
            }
        }
        true
    }
}

/// A random valid model and the goal to draft.
pub fn random_model(pick: Pick<'_>) -> Generated {
    let uispec = random_uispec(pick);
    let (mut model, derivation) =
        ingest(&uispec, &bundled::default_rules(), &bundled::base_model()).expect("generated spec derives");
    let agent = derivation.agent.id.clone();
    let mut goal_candidates = Vec::new();
    for complex in [
        ActionComplex::new("save", Actor::Reader).with_actee(Filler::Instance("current-document".into())),
        ActionComplex::new("open", Actor::Reader).with_actee(Filler::Concept("folder".into())),
    ] {
        goal_candidates.push(model.add_action(complex, Origin::Authored).expect("domain action").id);
    }
    let mut effects = Vec::new();
    for obj in &derivation.objects {
        if matches!(obj.concept.as_str(), "dialog-box" | "window") {
            let complex =
                ActionComplex::new("display", Actor::Agent(agent.clone())).with_actee(Filler::Instance(obj.id.clone()));
            effects.push(model.add_action(complex, Origin::Authored).expect("system action").id);
        }
    }
    let mut pool: Vec<NodeId> = derivation.actions.iter().map(|a| a.id.clone()).collect();
    let goal = if pick(3) == 0 {
        pool.remove(pick(pool.len()))
    } else {
        goal_candidates.remove(pick(goal_candidates.len()))
    };
    pool.extend(goal_candidates);
    let mut grower = Grower {
        pick,
        model,
        pool,
        effects,
        plans: 0,
    };
    assert!(
        grower.grow(&goal, 0),
        "every generated spec derives at least one action"
    );
    let model = grower.model;
    debug_assert!(model.validate().is_empty(), "{:?}", model.validate());
    Generated { uispec, model, goal }
}

/// A `pick` function from a 64-bit seed (splitmix64), for callers without a
/// random number crate.
pub fn seeded(seed: u64) -> impl FnMut(usize) -> usize {
    let mut state = seed;
    move |n| {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z % n as u64) as usize
    }
}
