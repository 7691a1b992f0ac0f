use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::{Decomposition, Filler, Layer, NodeType, RelationKind, TaskModel, ACTION_CONCEPT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    UnknownConcept,
    ConceptCycle,
    RootLayer,
    LayerOrder,
    ProcessNotAction,
    DanglingFiller,
    IdClash,
    MissingGoal,
    DuplicateGoal,
    NeedsSubAction,
    NeedsTwoAlternatives,
    MissingOrder,
    OrderCollision,
    OrderGap,
    DanglingEndpoint,
    TypeMismatch,
    MultipleAchievers,
    Cycle,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::UnknownConcept => "unknown-concept",
            ViolationCode::ConceptCycle => "concept-cycle",
            ViolationCode::RootLayer => "root-layer",
            ViolationCode::LayerOrder => "layer-order",
            ViolationCode::ProcessNotAction => "process-not-action",
            ViolationCode::DanglingFiller => "dangling-filler",
            ViolationCode::IdClash => "id-clash",
            ViolationCode::MissingGoal => "missing-goal",
            ViolationCode::DuplicateGoal => "duplicate-goal",
            ViolationCode::NeedsSubAction => "needs-sub-action",
            ViolationCode::NeedsTwoAlternatives => "needs-≥2-alternatives",
            ViolationCode::MissingOrder => "missing-order",
            ViolationCode::OrderCollision => "order-collision",
            ViolationCode::OrderGap => "order-gap",
            ViolationCode::DanglingEndpoint => "dangling-endpoint",
            ViolationCode::TypeMismatch => "type-mismatch",
            ViolationCode::MultipleAchievers => "multiple-achievers",
            ViolationCode::Cycle => "cycle",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ViolationCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// One broken invariant. `ids` names the offending concepts, nodes or, for
/// cycles, the closed path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub ids: Vec<String>,
    pub detail: String,
}

impl Violation {
    fn new(code: ViolationCode, ids: Vec<String>, detail: impl Into<String>) -> Self {
        Self {
            code,
            ids,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.code == ViolationCode::Cycle {
            " -> "
        } else {
            ", "
        };
        write!(f, "{}: {}", self.code, self.ids.join(sep))?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

impl TaskModel {
    /// Checks every model and edge invariant. Pure; output order is stable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check_concepts(&mut out);
        self.check_instances(&mut out);
        self.check_actions(&mut out);
        self.check_edges(&mut out);
        self.check_plans(&mut out);
        self.check_achievers(&mut out);
        self.check_cycles(&mut out);
        out
    }

    fn check_concepts(&self, out: &mut Vec<Violation>) {
        for c in self.concepts.values() {
            let mut seen = BTreeSet::from([c.id.as_str()]);
            let mut cur = c;
            loop {
                match &cur.parent {
                    None => {
                        if cur.layer != Layer::Upper {
                            out.push(Violation::new(
                                ViolationCode::RootLayer,
                                vec![c.id.to_string(), cur.id.to_string()],
                                format!("root `{}` is in the {} layer", cur.id, cur.layer.as_str()),
                            ));
                        }
                        break;
                    }
                    Some(p) => match self.concepts.get(p) {
                        None => {
                            out.push(Violation::new(
                                ViolationCode::UnknownConcept,
                                vec![cur.id.to_string(), p.to_string()],
                                "unknown parent",
                            ));
                            break;
                        }
                        Some(parent) => {
                            if !seen.insert(parent.id.as_str()) {
                                out.push(Violation::new(
                                    ViolationCode::ConceptCycle,
                                    vec![c.id.to_string()],
                                    "parent chain loops",
                                ));
                                break;
                            }
                            cur = parent;
                        }
                    },
                }
            }
            if let Some(parent) = c.parent.as_ref().and_then(|p| self.concepts.get(p)) {
                if c.layer.index() < parent.layer.index() {
                    out.push(Violation::new(
                        ViolationCode::LayerOrder,
                        vec![c.id.to_string(), parent.id.to_string()],
                        format!("{} under {}", c.layer.as_str(), parent.layer.as_str()),
                    ));
                }
            }
        }
    }

    fn check_instances(&self, out: &mut Vec<Violation>) {
        for inst in self.instances.values() {
            if !self.concepts.contains_key(&inst.concept) {
                out.push(Violation::new(
                    ViolationCode::UnknownConcept,
                    vec![inst.id.to_string(), inst.concept.to_string()],
                    "instance of unknown concept",
                ));
            }
            if self.concepts.contains_key(inst.id.as_str()) {
                out.push(Violation::new(
                    ViolationCode::IdClash,
                    vec![inst.id.to_string()],
                    "instance and concept share an id",
                ));
            }
        }
    }

    fn check_actions(&self, out: &mut Vec<Violation>) {
        for a in self.actions.values() {
            let c = &a.complex;
            if !self.is_a(c.process.as_str(), ACTION_CONCEPT) {
                out.push(Violation::new(
                    ViolationCode::ProcessNotAction,
                    vec![a.id.to_string(), c.process.to_string()],
                    "",
                ));
            }
            if let super::Actor::Agent(agent) = &c.actor {
                if !self.instances.contains_key(agent) {
                    out.push(Violation::new(
                        ViolationCode::DanglingFiller,
                        vec![a.id.to_string(), agent.to_string()],
                        "role actor",
                    ));
                }
            }
            for (role, filler) in c.fillers() {
                let resolved = match filler {
                    Filler::Instance(id) => self.instances.contains_key(id),
                    Filler::Concept(id) => self.concepts.contains_key(id),
                };
                if !resolved {
                    out.push(Violation::new(
                        ViolationCode::DanglingFiller,
                        vec![a.id.to_string(), filler.as_str().to_string()],
                        format!("role {role}"),
                    ));
                }
            }
            if let Some(means) = &c.means {
                if self.node_type(means.as_str()).is_none() {
                    out.push(Violation::new(
                        ViolationCode::DanglingFiller,
                        vec![a.id.to_string(), means.to_string()],
                        "role means",
                    ));
                }
            }
            if let Some(slot) = &c.open_slot {
                if !self.concepts.contains_key(&slot.concept) {
                    out.push(Violation::new(
                        ViolationCode::UnknownConcept,
                        vec![a.id.to_string(), slot.concept.to_string()],
                        format!("open {} slot", slot.role),
                    ));
                }
            }
        }
    }

    fn check_edges(&self, out: &mut Vec<Violation>) {
        for e in &self.edges {
            let (want_from, want_to) = e.kind.endpoints();
            let mut dangling = false;
            for (id, want) in [(&e.from, want_from), (&e.to, want_to)] {
                match self.node_type(id.as_str()) {
                    None => {
                        dangling = true;
                        out.push(Violation::new(
                            ViolationCode::DanglingEndpoint,
                            vec![e.from.to_string(), e.to.to_string()],
                            format!("{} edge endpoint `{id}` does not exist", e.kind),
                        ));
                    }
                    Some(found) if found != want => out.push(Violation::new(
                        ViolationCode::TypeMismatch,
                        vec![e.from.to_string(), e.to.to_string()],
                        format!("{} expects {want} at `{id}`, found {found}", e.kind),
                    )),
                    Some(_) => {}
                }
            }
            if e.kind == RelationKind::SideEffect && !dangling {
                if let Some(target) = self.actions.get(&e.to) {
                    if !self.is_system_agent(&target.complex.actor) {
                        out.push(Violation::new(
                            ViolationCode::TypeMismatch,
                            vec![e.from.to_string(), e.to.to_string()],
                            "side-effect must be performed by a system agent",
                        ));
                    }
                }
            }
        }
    }

    fn check_plans(&self, out: &mut Vec<Violation>) {
        for plan in self.plans.values() {
            let id = plan.id.as_str();
            let goals: Vec<_> = self.edges_from(id, RelationKind::Goal).collect();
            match goals.len() {
                0 => out.push(Violation::new(ViolationCode::MissingGoal, vec![id.into()], "")),
                1 => {}
                _ => out.push(Violation::new(
                    ViolationCode::DuplicateGoal,
                    std::iter::once(id.to_string())
                        .chain(goals.iter().map(|e| e.to.to_string()))
                        .collect(),
                    "",
                )),
            }
            let subs: Vec<_> = self.edges_from(id, RelationKind::SubAction).collect();
            match plan.decomposition {
                Decomposition::Choice if subs.len() < 2 => out.push(Violation::new(
                    ViolationCode::NeedsTwoAlternatives,
                    vec![id.into()],
                    format!("{} alternative(s)", subs.len()),
                )),
                Decomposition::Sequence if subs.is_empty() => {
                    out.push(Violation::new(ViolationCode::NeedsSubAction, vec![id.into()], ""))
                }
                _ => {}
            }
            let mut by_order: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
            for e in &subs {
                match e.order {
                    Some(o) => by_order.entry(o).or_default().push(e.to.as_str()),
                    None if plan.decomposition == Decomposition::Sequence => out.push(Violation::new(
                        ViolationCode::MissingOrder,
                        vec![id.into(), e.to.to_string()],
                        "",
                    )),
                    None => {}
                }
            }
            for (order, targets) in &by_order {
                if targets.len() > 1 {
                    out.push(Violation::new(
                        ViolationCode::OrderCollision,
                        std::iter::once(id.to_string())
                            .chain(targets.iter().map(|t| t.to_string()))
                            .collect(),
                        format!("order {order}"),
                    ));
                }
            }
            if plan.decomposition == Decomposition::Sequence
                && !by_order.is_empty()
                && by_order.keys().copied().ne(1..=by_order.len() as u32)
            {
                out.push(Violation::new(
                    ViolationCode::OrderGap,
                    vec![id.into()],
                    format!(
                        "orders {:?} are not 1..{}",
                        by_order.keys().collect::<Vec<_>>(),
                        by_order.len()
                    ),
                ));
            }
        }
    }

    fn check_achievers(&self, out: &mut Vec<Violation>) {
        let mut achievers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            if e.kind == RelationKind::Goal && self.node_type(e.to.as_str()) == Some(NodeType::Action) {
                achievers.entry(e.to.as_str()).or_default().push(e.from.as_str());
            }
        }
        for (action, plans) in achievers {
            if plans.len() > 1 {
                out.push(Violation::new(
                    ViolationCode::MultipleAchievers,
                    std::iter::once(action.to_string())
                        .chain(plans.iter().map(|p| p.to_string()))
                        .collect(),
                    "",
                ));
            }
        }
    }

    /// One violation per strongly connected component of the hierarchy graph,
    /// reporting the shortest cycle through its smallest node.
    fn check_cycles(&self, out: &mut Vec<Violation>) {
        let nodes: Vec<&str> = self
            .actions
            .keys()
            .chain(self.plans.keys())
            .map(|n| n.as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for component in strongly_connected(&nodes, |n| self.hierarchy_successors(n)) {
            let start = component[0];
            let members: BTreeSet<&str> = component.iter().copied().collect();
            let path = shortest_cycle(start, &members, |n| self.hierarchy_successors(n));
            out.push(Violation::new(
                ViolationCode::Cycle,
                path.into_iter().map(str::to_string).collect(),
                "",
            ));
        }
    }
}

/// Tarjan's algorithm; returns the non-trivial components (size > 1, or a
/// self-loop), each sorted, in order of their smallest member.
fn strongly_connected<'a, F>(nodes: &[&'a str], successors: F) -> Vec<Vec<&'a str>>
where
    F: Fn(&str) -> Vec<&'a super::NodeId>,
{
    struct State<'a> {
        index: BTreeMap<&'a str, usize>,
        low: BTreeMap<&'a str, usize>,
        stack: Vec<&'a str>,
        on_stack: BTreeSet<&'a str>,
        next: usize,
        out: Vec<Vec<&'a str>>,
    }

    fn visit<'a, F>(v: &'a str, st: &mut State<'a>, succ: &F)
    where
        F: Fn(&str) -> Vec<&'a super::NodeId>,
    {
        st.index.insert(v, st.next);
        st.low.insert(v, st.next);
        st.next += 1;
        st.stack.push(v);
        st.on_stack.insert(v);
        let mut self_loop = false;
        for w in succ(v) {
            let w = w.as_str();
            if w == v {
                self_loop = true;
            }
            if !st.index.contains_key(w) {
                visit(w, st, succ);
                let lw = st.low[w];
                let lv = st.low.get_mut(v).unwrap();
                *lv = (*lv).min(lw);
            } else if st.on_stack.contains(w) {
                let iw = st.index[w];
                let lv = st.low.get_mut(v).unwrap();
                *lv = (*lv).min(iw);
            }
        }
        if st.low[v] == st.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().unwrap();
                st.on_stack.remove(w);
                comp.push(w);
                if w == v {
                    break;
                }
            }
            if comp.len() > 1 || self_loop {
                comp.sort();
                st.out.push(comp);
            }
        }
    }

    let mut st = State {
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        out: Vec::new(),
    };
    for &n in nodes {
        if !st.index.contains_key(n) {
            visit(n, &mut st, &successors);
        }
    }
    st.out.sort();
    st.out
}

fn shortest_cycle<'a, F>(start: &'a str, members: &BTreeSet<&'a str>, successors: F) -> Vec<&'a str>
where
    F: Fn(&str) -> Vec<&'a super::NodeId>,
{
    let mut prev: BTreeMap<&str, &str> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(n) = queue.pop_front() {
        for next in successors(n) {
            let next = next.as_str();
            if !members.contains(next) {
                continue;
            }
            if next == start {
                let mut path = vec![n];
                let mut cur = n;
                while cur != start {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                path.push(start);
                return path;
            }
            if next != start && !prev.contains_key(next) {
                prev.insert(next, n);
                queue.push_back(next);
            }
        }
    }
    vec![start]
}
