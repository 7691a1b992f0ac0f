//! Graph export of the procedural structure for external layout tools.
//!
//! Nodes are typed `action`, `effect` (an action performed by the system,
//! reached through a side-effect edge) or `plan`; edges carry their relation
//! kind. Output order is fixed: actions, then plans, each by id; edges in
//! (kind, from, to) order.

use std::fmt::Write as _;

use serde::Serialize;

use crate::kb::TaskModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphNodeType {
    Action,
    Effect,
    Plan,
}

impl GraphNodeType {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphNodeType::Action => "action",
            GraphNodeType::Effect => "effect",
            GraphNodeType::Plan => "plan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphNode {
    pub id: String,
    #[serde(rename = "type")]
    pub node_type: GraphNodeType,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub kind: String,
    pub from: String,
    pub to: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl Graph {
    pub fn of(model: &TaskModel) -> Self {
        let mut nodes: Vec<GraphNode> = model
            .actions()
            .map(|a| GraphNode {
                id: a.id.to_string(),
                node_type: if model.is_system_agent(&a.complex.actor) {
                    GraphNodeType::Effect
                } else {
                    GraphNodeType::Action
                },
                label: a.id.to_string(),
            })
            .collect();
        nodes.extend(model.plans().map(|p| GraphNode {
            id: p.id.to_string(),
            node_type: GraphNodeType::Plan,
            label: p.label.clone().unwrap_or_else(|| p.id.to_string()),
        }));
        let edges = model
            .edges()
            .map(|e| GraphEdge {
                kind: e.kind.to_string(),
                from: e.from.to_string(),
                to: e.to.to_string(),
                order: e.order,
            })
            .collect();
        Graph { nodes, edges }
    }

    pub fn count(&self, t: GraphNodeType) -> usize {
        self.nodes.iter().filter(|n| n.node_type == t).count()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph taskmodel {\n");
        for n in &self.nodes {
            let style = match n.node_type {
                GraphNodeType::Action => "shape=ellipse",
                GraphNodeType::Effect => "shape=ellipse, style=dashed",
                GraphNodeType::Plan => "shape=box",
            };
            let _ = writeln!(
                out,
                "  {} [type={}, label={}, {style}];",
                dot_id(&n.id),
                n.node_type.as_str(),
                dot_id(&n.label)
            );
        }
        for e in &self.edges {
            let _ = write!(
                out,
                "  {} -> {} [label={}",
                dot_id(&e.from),
                dot_id(&e.to),
                dot_id(&e.kind)
            );
            if let Some(order) = e.order {
                let _ = write!(out, ", order={order}");
            }
            out.push_str("];\n");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("graph serializes");
        out.push('\n');
        out
    }
}

fn dot_id(text: &str) -> String {
    format!("\"{}\"", text.replace('\\', "\\\\").replace('"', "\\\""))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::RelationKind;
    use crate::pipeline::example_model;

    #[test]
    fn example_inventory() {
        let g = Graph::of(&example_model());
        assert_eq!(g.count(GraphNodeType::Action), 9);
        assert_eq!(g.count(GraphNodeType::Effect), 1);
        assert_eq!(g.count(GraphNodeType::Plan), 3);
        let kinds: std::collections::BTreeSet<_> = g.edges.iter().map(|e| e.kind.as_str()).collect();
        assert_eq!(
            kinds.into_iter().collect::<Vec<_>>(),
            ["cancellation", "goal", "precondition", "side-effect", "sub-action"]
        );
        let dot = g.to_dot();
        assert!(dot.starts_with("digraph taskmodel {\n"));
        assert!(dot.contains("  \"open-save-as-plan\" -> \"choose-save-option\" [label=\"sub-action\", order=1];\n"));
        assert!(dot.contains(
            "  \"display-save-as\" [type=effect, label=\"display-save-as\", shape=ellipse, style=dashed];\n"
        ));
        assert_eq!(dot, Graph::of(&example_model()).to_dot());
    }

    #[test]
    fn empty_and_warning() {
        assert_eq!(Graph::of(&TaskModel::new()).to_dot(), "digraph taskmodel {\n}\n");
        let mut model = example_model();
        model
            .link(RelationKind::Warning, "save-document-plan", "open-folder", None)
            .unwrap();
        assert!(Graph::of(&model).to_dot().contains("[label=\"warning\"]"));
    }

    #[test]
    fn json_shape() {
        let v: serde_json::Value = serde_json::from_str(&Graph::of(&example_model()).to_json()).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 13);
        assert_eq!(v["nodes"][0]["type"], "action");
    }
}
