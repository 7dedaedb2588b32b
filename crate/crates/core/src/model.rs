//! In-memory representation of activity and sequence diagrams.
//!
//! Every other module consumes these types. They are plain data: construction
//! never validates, [`validate_refs`] reports the reference problems of an
//! activity graph as diagnostics instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::lint::{Diagnostic, Severity};

/// Kinds of activity nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum NodeKind {
    Initial,
    ActivityFinal,
    FlowFinal,
    Action,
    Decision,
    Merge,
    Fork,
    Join,
    LoopNode,
}

impl NodeKind {
    /// The DSL keyword that declares a node of this kind.
    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Initial => "start",
            NodeKind::ActivityFinal => "end",
            NodeKind::FlowFinal => "flowfinal",
            NodeKind::Action => "action",
            NodeKind::Decision => "decision",
            NodeKind::Merge => "merge",
            NodeKind::Fork => "fork",
            NodeKind::Join => "join",
            NodeKind::LoopNode => "loopnode",
        }
    }

    pub fn from_keyword(word: &str) -> Option<NodeKind> {
        Some(match word {
            "start" => NodeKind::Initial,
            "end" => NodeKind::ActivityFinal,
            "flowfinal" => NodeKind::FlowFinal,
            "action" => NodeKind::Action,
            "decision" => NodeKind::Decision,
            "merge" => NodeKind::Merge,
            "fork" => NodeKind::Fork,
            "join" => NodeKind::Join,
            "loopnode" => NodeKind::LoopNode,
            _ => return None,
        })
    }

    /// Whether edges leaving a node of this kind may carry guards.
    pub fn allows_guards(self) -> bool {
        matches!(self, NodeKind::Decision | NodeKind::LoopNode)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    /// Assignment list executed when the action runs (`i = i + 1, j = 0`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect: Option<String>,
    /// Nested body of a loop node; its own Initial/ActivityFinal delimit one iteration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<Box<ActivityGraph>>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        Node {
            id: id.into(),
            kind,
            label: String::new(),
            effect: None,
            body: None,
        }
    }

    pub fn action(id: impl Into<String>, label: impl Into<String>, effect: Option<String>) -> Self {
        Node {
            label: label.into(),
            effect,
            ..Node::new(id, NodeKind::Action)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: String,
    pub source: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
}

/// The control structure named by an annotation comment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Construct {
    If,
    While,
    DoWhile,
    For,
}

impl Construct {
    pub fn keyword(self) -> &'static str {
        match self {
            Construct::If => "if",
            Construct::While => "while",
            Construct::DoWhile => "dowhile",
            Construct::For => "for",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Construct> {
        Some(match word {
            "if" => Construct::If,
            "while" => Construct::While,
            "dowhile" => Construct::DoWhile,
            "for" => Construct::For,
            _ => return None,
        })
    }

    pub fn is_loop(self) -> bool {
        !matches!(self, Construct::If)
    }
}

/// Comment attached to a branch or loop: construct type, shared number, condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ControlAnnotation {
    pub construct: Construct,
    pub number: u32,
    pub open_node: String,
    pub close_node: String,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ActivityGraph {
    pub name: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub annotations: Vec<ControlAnnotation>,
}

impl ActivityGraph {
    pub fn new(name: impl Into<String>) -> Self {
        ActivityGraph {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.source == id)
    }

    pub fn incoming<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.target == id)
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    pub fn add_node(&mut self, node: Node) {
        self.nodes.push(node);
    }

    /// Appends a flow and returns its id.
    ///
    /// Edge ids are `source->target`; parallel flows between the same pair get
    /// a `~2`, `~3`, ... suffix in declaration order.
    pub fn add_edge(
        &mut self,
        source: impl Into<String>,
        target: impl Into<String>,
        guard: Option<String>,
    ) -> String {
        let source = source.into();
        let target = target.into();
        let id = edge_id(&source, &target, self.edges.iter().map(|e| e.id.as_str()));
        self.edges.push(Edge {
            id: id.clone(),
            source,
            target,
            guard,
        });
        id
    }

    /// This graph and every loop-node body nested in it, outermost first.
    pub fn all_graphs(&self) -> Vec<&ActivityGraph> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let g = out[i];
            for n in &g.nodes {
                if let Some(body) = &n.body {
                    out.push(body);
                }
            }
            i += 1;
        }
        out
    }

    pub fn annotation_for(&self, open: &str) -> Option<&ControlAnnotation> {
        self.annotations.iter().find(|a| a.open_node == open)
    }
}

/// Canonical id for a new flow given the ids already in use.
pub fn edge_id<'a>(source: &str, target: &str, existing: impl Iterator<Item = &'a str>) -> String {
    let base = format!("{source}->{target}");
    let taken: BTreeSet<&str> = existing.collect();
    if !taken.contains(base.as_str()) {
        return base;
    }
    (2..)
        .map(|k| format!("{base}~{k}"))
        .find(|id| !taken.contains(id.as_str()))
        .expect("unbounded suffix search")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lifeline {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum MessageKind {
    Sync,
    Async,
    Reply,
}

impl MessageKind {
    pub fn keyword(self) -> &'static str {
        match self {
            MessageKind::Sync => "sync",
            MessageKind::Async => "async",
            MessageKind::Reply => "reply",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageEvent {
    pub id: String,
    pub from: String,
    pub to: String,
    pub label: String,
    pub kind: MessageKind,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum FragmentKind {
    Alt,
    Opt,
    Loop,
    Par,
}

impl FragmentKind {
    pub fn keyword(self) -> &'static str {
        match self {
            FragmentKind::Alt => "alt",
            FragmentKind::Opt => "opt",
            FragmentKind::Loop => "loop",
            FragmentKind::Par => "par",
        }
    }

    pub fn from_keyword(word: &str) -> Option<FragmentKind> {
        Some(match word {
            "alt" => FragmentKind::Alt,
            "opt" => FragmentKind::Opt,
            "loop" => FragmentKind::Loop,
            "par" => FragmentKind::Par,
            _ => return None,
        })
    }
}

/// Inclusive range of event order indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn disjoint(&self, other: &Span) -> bool {
        self.end < other.start || other.end < self.start
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }
}

/// One operand (compartment) of an `alt` or `par` fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Operand {
    pub span: Span,
    /// Guard written on the separator; the first operand uses the fragment condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fragment {
    pub id: String,
    pub kind: FragmentKind,
    pub number: u32,
    pub condition: String,
    pub span: Span,
    pub operands: Vec<Operand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SequenceModel {
    pub name: String,
    pub lifelines: Vec<Lifeline>,
    pub events: Vec<MessageEvent>,
    pub fragments: Vec<Fragment>,
}

impl SequenceModel {
    /// Removes one message and shifts every span after it.
    ///
    /// Fragments and operands left without messages are dropped.
    pub fn without_event(&self, index: usize) -> SequenceModel {
        let mut out = self.clone();
        if index >= out.events.len() {
            return out;
        }
        out.events.remove(index);
        for (i, e) in out.events.iter_mut().enumerate() {
            e.order = i;
        }
        let shrink = |s: Span| -> Option<Span> {
            let len = s.end - s.start + 1;
            if s.contains_index(index) {
                if len == 1 {
                    return None;
                }
                Some(Span::new(s.start, s.end - 1))
            } else if s.start > index {
                Some(Span::new(s.start - 1, s.end - 1))
            } else {
                Some(s)
            }
        };
        out.fragments = out
            .fragments
            .into_iter()
            .filter_map(|mut f| {
                f.span = shrink(f.span)?;
                f.operands = f
                    .operands
                    .into_iter()
                    .filter_map(|mut o| {
                        o.span = shrink(o.span)?;
                        Some(o)
                    })
                    .collect();
                Some(f)
            })
            .collect();
        out
    }
}

/// Lowercases, trims, and collapses internal whitespace runs to one space.
pub fn normalize_label(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub const REF_DUPLICATE: &str = "REF-DUPLICATE";
pub const REF_SOURCE: &str = "REF-SOURCE";
pub const REF_TARGET: &str = "REF-TARGET";
pub const REF_GUARD: &str = "REF-GUARD";
pub const REF_EFFECT: &str = "REF-EFFECT";
pub const REF_BODY: &str = "REF-BODY";

fn ref_error(rule: &'static str, locus: &str, message: String) -> Diagnostic {
    Diagnostic {
        rule,
        severity: Severity::Error,
        locus: locus.to_string(),
        message,
    }
}

/// Reports every violated reference invariant of `g` and its loop-node bodies.
///
/// The result is sorted by `(rule, locus, message)`, so it does not depend on
/// declaration order.
pub fn validate_refs(g: &ActivityGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for graph in g.all_graphs() {
        for n in &graph.nodes {
            *seen.entry(n.id.as_str()).or_default() += 1;
        }
    }
    for (id, count) in &seen {
        if *count > 1 {
            out.push(ref_error(
                REF_DUPLICATE,
                id,
                format!("node id `{id}` is declared {count} times"),
            ));
        }
    }
    for graph in g.all_graphs() {
        validate_graph(graph, &mut out);
    }
    out.sort_by(|a, b| (a.rule, &a.locus, &a.message).cmp(&(b.rule, &b.locus, &b.message)));
    out
}

fn validate_graph(g: &ActivityGraph, out: &mut Vec<Diagnostic>) {
    let kinds: BTreeMap<&str, NodeKind> = g.nodes.iter().map(|n| (n.id.as_str(), n.kind)).collect();
    for n in &g.nodes {
        if n.effect.is_some() && n.kind != NodeKind::Action {
            out.push(ref_error(
                REF_EFFECT,
                &n.id,
                format!("{} `{}` carries an effect; only actions may", n.kind, n.id),
            ));
        }
        if n.body.is_some() != (n.kind == NodeKind::LoopNode) {
            let message = if n.kind == NodeKind::LoopNode {
                format!("loop node `{}` has no body", n.id)
            } else {
                format!("{} `{}` carries a nested body", n.kind, n.id)
            };
            out.push(ref_error(REF_BODY, &n.id, message));
        }
    }
    let mut edge_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &g.edges {
        *edge_ids.entry(e.id.as_str()).or_default() += 1;
        let source = kinds.get(e.source.as_str());
        if source.is_none() {
            out.push(ref_error(
                REF_SOURCE,
                &e.id,
                format!("flow `{}` starts at unknown node `{}`", e.id, e.source),
            ));
        }
        if !kinds.contains_key(e.target.as_str()) {
            out.push(ref_error(
                REF_TARGET,
                &e.id,
                format!("flow `{}` ends at unknown node `{}`", e.id, e.target),
            ));
        }
        if let (Some(_), Some(kind)) = (&e.guard, source) {
            if !kind.allows_guards() {
                out.push(ref_error(
                    REF_GUARD,
                    &e.id,
                    format!("flow `{}` leaves {} `{}` but carries a guard", e.id, kind, e.source),
                ));
            }
        }
    }
    for (id, count) in edge_ids {
        if count > 1 {
            out.push(ref_error(
                REF_DUPLICATE,
                id,
                format!("flow id `{id}` is used {count} times"),
            ));
        }
    }
}
