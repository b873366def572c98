//! Search-tree reconstruction from tell/told/reduce events, and its DOT
//! rendering.
//!
//! Tell and told events correspond to downward and upward moves of a
//! depth-first visit, so the tree is rebuilt from the visit order alone.
//! Consecutive tells with a non-labelling context are merged into the
//! single arc under the root that sums up the permanent constraints of
//! the program; every other tell opens one arc. Node contents accumulate
//! the reduced domains of the node's propagation phase.

use std::sync::Arc;

use crate::domain::Domain;
use crate::trace::{Port, TraceEvent, TraceSink};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Internal,
    /// A reject occurred in the node's propagation phase.
    Failure,
    /// The phase ended at a fixpoint with every domain a singleton.
    Solution,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Label of the incoming arc; `None` for the root.
    pub arc_label: Option<String>,
    pub children: Vec<usize>,
    pub kind: NodeKind,
    /// Domains as reduced during this node's phase (first-touch order);
    /// the root holds the initial domains instead.
    pub content: Vec<(Arc<str>, Domain)>,
}

#[derive(Debug, Clone)]
pub struct SearchTree {
    pub nodes: Vec<TreeNode>,
}

impl SearchTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.children.is_empty() && n.parent.is_some())
    }

    pub fn solution_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Solution).count()
    }

    pub fn failure_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Failure).count()
    }

    /// Nodes with more than one labelling alternative below them.
    pub fn choice_points(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.len() >= 2).count()
    }

    /// Arcs below the root arc; equals the number of labelling tells.
    pub fn arcs_below_root(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.parent.is_some() && n.parent != Some(0))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StreamError {
    #[error("unbalanced tell/told: told at chrono {chrono} with no open tell")]
    ToldUnderflow { chrono: u64 },
    #[error("unbalanced tell/told: {open} tells still open at end of stream")]
    OpenTells { open: usize },
}

struct StackEntry {
    node: usize,
    /// `Some` while the propagation phase opened by this entry's tell has
    /// not yet been closed by the next control event.
    phase_open: bool,
    rejected: bool,
}

/// Incremental tree construction; also usable as a live trace sink.
pub struct TreeBuilder {
    nodes: Vec<TreeNode>,
    stack: Vec<StackEntry>,
    merged_node: Option<usize>,
    seen_any_event: bool,
    error: Option<StreamError>,
}

impl Default for TreeBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TreeBuilder {
    pub fn new() -> Self {
        TreeBuilder {
            nodes: vec![TreeNode {
                id: 0,
                parent: None,
                arc_label: None,
                children: Vec::new(),
                kind: NodeKind::Internal,
                content: Vec::new(),
            }],
            stack: vec![StackEntry { node: 0, phase_open: false, rejected: false }],
            merged_node: None,
            seen_any_event: false,
            error: None,
        }
    }

    fn new_node(&mut self, parent: usize, arc_label: String) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            id,
            parent: Some(parent),
            arc_label: Some(arc_label),
            children: Vec::new(),
            kind: NodeKind::Internal,
            content: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn close_phase(&mut self, boundary: &TraceEvent) {
        let entry = self.stack.last_mut().expect("stack holds at least the root");
        if !entry.phase_open {
            return;
        }
        entry.phase_open = false;
        let kind = if entry.rejected {
            NodeKind::Failure
        } else if boundary.domains.all_singleton() {
            NodeKind::Solution
        } else {
            NodeKind::Internal
        };
        let node = entry.node;
        self.nodes[node].kind = kind;
    }

    pub fn observe(&mut self, event: &TraceEvent) {
        if self.error.is_some() {
            return;
        }
        if !self.seen_any_event {
            self.seen_any_event = true;
            self.nodes[0].content = event.domains.0.clone();
        }
        match event.port {
            Port::Tell => {
                self.close_phase(event);
                let is_labelling = event.constraint.context.starts_with("labelling(");
                let top = self.stack.last().unwrap().node;
                let mergeable = top == 0 || Some(top) == self.merged_node;
                let node = if !is_labelling && mergeable {
                    match self.merged_node {
                        Some(node) => {
                            let label = self.nodes[node].arc_label.get_or_insert_with(String::new);
                            label.push_str(", ");
                            label.push_str(&event.constraint.abstract_text);
                            node
                        }
                        None => {
                            let node = self.new_node(0, event.constraint.abstract_text.to_string());
                            self.merged_node = Some(node);
                            node
                        }
                    }
                } else {
                    self.new_node(top, event.constraint.abstract_text.to_string())
                };
                self.stack.push(StackEntry { node, phase_open: true, rejected: false });
            }
            Port::Told => {
                self.close_phase(event);
                if self.stack.len() <= 1 {
                    self.error = Some(StreamError::ToldUnderflow { chrono: event.chrono });
                    return;
                }
                self.stack.pop();
            }
            Port::Reduce => {
                let node = self.stack.last().unwrap().node;
                if let Some(withdrawn) = &event.withdrawn {
                    if let Some(before) = event.domains.get(&withdrawn.var) {
                        let after = before.remove_values(&withdrawn.values);
                        let content = &mut self.nodes[node].content;
                        match content.iter_mut().find(|(name, _)| *name == withdrawn.var) {
                            Some(slot) => slot.1 = after,
                            None => content.push((Arc::clone(&withdrawn.var), after)),
                        }
                    }
                }
            }
            Port::Reject => {
                let entry = self.stack.last_mut().unwrap();
                entry.rejected = true;
            }
            _ => {}
        }
    }

    pub fn finish(mut self) -> Result<SearchTree, StreamError> {
        if let Some(error) = self.error.take() {
            return Err(error);
        }
        let open = self.stack.len() - 1;
        if open > 0 {
            return Err(StreamError::OpenTells { open });
        }
        Ok(SearchTree { nodes: self.nodes })
    }
}

impl TraceSink for TreeBuilder {
    fn emit(&mut self, event: &TraceEvent) {
        self.observe(event);
    }
}

/// Rebuilds the whole search tree from a complete stream.
pub fn build_search_tree<'a>(
    events: impl IntoIterator<Item = &'a TraceEvent>,
) -> Result<SearchTree, StreamError> {
    let mut builder = TreeBuilder::new();
    for event in events {
        builder.observe(event);
    }
    builder.finish()
}

fn dot_escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_label(node: &TreeNode) -> String {
    node.content
        .iter()
        .map(|(name, dom)| dot_escape(&format!("{name}:{dom}")))
        .collect::<Vec<_>>()
        .join("\\n")
}

/// Renders the tree as a DOT digraph with the conventional shapes:
/// failures in square boxes, solutions in double circles, internal nodes
/// in ellipses. Nodes are numbered in preorder.
pub fn emit_dot(tree: &SearchTree) -> String {
    let mut order = Vec::with_capacity(tree.nodes.len());
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        order.push(id);
        for &child in tree.nodes[id].children.iter().rev() {
            stack.push(child);
        }
    }
    let display: std::collections::HashMap<usize, usize> =
        order.iter().enumerate().map(|(pos, &id)| (id, pos)).collect();

    let mut out = String::from("digraph search_tree {\n");
    for &id in &order {
        let node = &tree.nodes[id];
        let shape = match node.kind {
            NodeKind::Internal => "ellipse",
            NodeKind::Failure => "box",
            NodeKind::Solution => "doublecircle",
        };
        out.push_str(&format!(
            "  n{} [shape={}, label=\"{}\"];\n",
            display[&id],
            shape,
            node_label(node)
        ));
    }
    for &id in &order {
        let node = &tree.nodes[id];
        for &child in &node.children {
            let label = tree.nodes[child].arc_label.as_deref().unwrap_or("");
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{}\"];\n",
                display[&id],
                display[&child],
                dot_escape(label)
            ));
        }
    }
    out.push_str("}\n");
    out
}
